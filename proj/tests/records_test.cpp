#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "popt/records.hpp"

using namespace popt;

namespace {
RunRecord make_row(const std::string& id, std::int64_t epoch, double loss) {
    RunRecord r;
    r.run_id = id;
    r.config_label = "label";
    r.epoch = epoch;
    r.loss = loss;
    r.wall_ms = 12;
    r.seed = 7;
    return r;
}
}  // namespace

TEST_CASE("empty record list is a header-only csv") {
    CHECK(records_to_csv({}) == "run_id,config_label,epoch,loss,metric,wall_ms,seed\n");
}

TEST_CASE("csv rendering with and without metric") {
    RunRecord a = make_row("r1", 0, 1.5);
    RunRecord b = make_row("r1", 1, 0.25);
    b.metric = 0.125;
    std::string csv = records_to_csv({a, b});
    CHECK(csv ==
          "run_id,config_label,epoch,loss,metric,wall_ms,seed\n"
          "r1,label,0,1.5,,12,7\n"
          "r1,label,1,0.25,0.125,12,7\n");
}

TEST_CASE("reals render with 17 significant digits and round-trip") {
    double v = 0.1 + 0.2;
    std::string s = format_real(v);
    CHECK(std::stod(s) == v);
    CHECK(format_real(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("duplicate (run_id, epoch) pairs are rejected") {
    RunRecord a = make_row("r1", 3, 1.0);
    CHECK_THROWS_AS(records_to_csv({a, a}), std::logic_error);
}

TEST_CASE("json round trip preserves every field") {
    RunRecord a = make_row("run-7", 2, 0.75);
    a.metric = 1.25;
    RunRecord b = make_row("run-7", 3, 0.5);  // metric absent

    std::string json_text = records_to_json({a, b});
    auto parsed = nlohmann::json::parse(json_text);
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 2);

    CHECK(parsed[0]["run_id"] == "run-7");
    CHECK(parsed[0]["config_label"] == "label");
    CHECK(parsed[0]["epoch"] == 2);
    CHECK(parsed[0]["loss"].get<double>() == 0.75);
    CHECK(parsed[0]["metric"].get<double>() == 1.25);
    CHECK(parsed[0]["wall_ms"] == 12);
    CHECK(parsed[0]["seed"] == 7);
    CHECK(parsed[1]["metric"].is_null());
}

TEST_CASE("write_records writes the same bytes the formatter returns") {
    auto path = std::filesystem::temp_directory_path() / "popt_records_test.csv";
    RunRecord a = make_row("r1", 0, 2.0);
    write_records({a}, path, RecordFormat::Csv);

    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == records_to_csv({a}));
    std::filesystem::remove(path);
}

TEST_CASE("aggregation reproduces a hand-computed mean and variance") {
    // three replicates of a single (label, epoch) cell: losses 1, 2, 4
    std::vector<std::vector<RunRecord>> reps;
    for (double loss : {1.0, 2.0, 4.0}) {
        RunRecord r = make_row("r", 5, loss);
        r.metric = loss * 10.0;
        reps.push_back({r});
    }
    auto rows = aggregate_records(reps);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].config_label == "label");
    CHECK(rows[0].epoch == 5);
    CHECK(rows[0].count == 3);
    // mean (1+2+4)/3 = 7/3; sample variance ((16+1+25)/9)*... = 7/3
    CHECK(rows[0].loss_mean == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(rows[0].loss_var == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    CHECK(*rows[0].metric_mean == doctest::Approx(70.0 / 3.0).epsilon(1e-12));
    CHECK(*rows[0].metric_var == doctest::Approx(700.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("aggregation keeps first-appearance order and handles missing metrics") {
    std::vector<std::vector<RunRecord>> reps(2);
    for (int rep = 0; rep < 2; ++rep) {
        for (int e = 0; e < 3; ++e) {
            RunRecord r = make_row("r" + std::to_string(rep), e, 1.0 * e + rep);
            r.config_label = "cfgA";
            reps[rep].push_back(r);
        }
        RunRecord other = make_row("q" + std::to_string(rep), 0, 5.0);
        other.config_label = "cfgB";
        reps[rep].push_back(other);
    }
    auto rows = aggregate_records(reps);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].config_label == "cfgA");
    CHECK(rows[0].epoch == 0);
    CHECK(rows[1].epoch == 1);
    CHECK(rows[2].epoch == 2);
    CHECK(rows[3].config_label == "cfgB");
    for (const auto& row : rows) {
        CHECK(row.count == 2);
        CHECK_FALSE(row.metric_mean.has_value());
    }

    std::string csv = aggregate_to_csv(rows);
    CHECK(csv.rfind("config_label,epoch,count,loss_mean,loss_var,metric_mean,metric_var\n", 0) ==
          0);
}
