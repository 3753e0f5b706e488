#include "popt/records.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace popt {

RecordFormat record_format_from_string(std::string_view name) {
    if (name == "csv") return RecordFormat::Csv;
    if (name == "json") return RecordFormat::Json;
    throw std::invalid_argument("unknown record format: " + std::string(name));
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {
void check_unique(const std::vector<RunRecord>& records) {
    std::set<std::pair<std::string, std::int64_t>> seen;
    for (const auto& r : records) {
        if (!seen.emplace(r.run_id, r.epoch).second) {
            throw std::logic_error("records: duplicate (run_id, epoch) pair: " + r.run_id +
                                   ", " + std::to_string(r.epoch));
        }
    }
}
}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
    check_unique(records);
    std::string out = kRecordCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += r.run_id;
        out += ',';
        out += r.config_label;
        out += ',';
        out += std::to_string(r.epoch);
        out += ',';
        out += format_real(r.loss);
        out += ',';
        if (r.metric.has_value()) out += format_real(*r.metric);
        out += ',';
        out += std::to_string(r.wall_ms);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::string records_to_json(const std::vector<RunRecord>& records) {
    check_unique(records);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json row;
        row["run_id"] = r.run_id;
        row["config_label"] = r.config_label;
        row["epoch"] = r.epoch;
        row["loss"] = r.loss;
        if (r.metric.has_value()) row["metric"] = *r.metric;
        else row["metric"] = nullptr;
        row["wall_ms"] = r.wall_ms;
        row["seed"] = r.seed;
        arr.push_back(std::move(row));
    }
    return arr.dump(2) + "\n";
}

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path,
                   RecordFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_records: cannot open " + path.string());
    out << (format == RecordFormat::Csv ? records_to_csv(records) : records_to_json(records));
    if (!out) throw std::runtime_error("write_records: write failed for " + path.string());
}

std::vector<AggregateRow> aggregate_records(const std::vector<std::vector<RunRecord>>& replicates) {
    struct Bucket {
        std::size_t order;
        std::vector<double> losses;
        std::vector<double> metrics;
    };
    std::map<std::pair<std::string, std::int64_t>, Bucket> buckets;
    std::size_t next_order = 0;
    for (const auto& rep : replicates) {
        for (const auto& r : rep) {
            auto key = std::make_pair(r.config_label, r.epoch);
            auto it = buckets.find(key);
            if (it == buckets.end()) {
                it = buckets.emplace(key, Bucket{next_order++, {}, {}}).first;
            }
            it->second.losses.push_back(r.loss);
            if (r.metric.has_value()) it->second.metrics.push_back(*r.metric);
        }
    }

    auto mean_var = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        if (xs.size() > 1) {
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size() - 1);
        }
        return std::make_pair(mean, var);
    };

    std::vector<AggregateRow> rows(buckets.size());
    for (const auto& [key, bucket] : buckets) {
        AggregateRow& row = rows[bucket.order];
        row.config_label = key.first;
        row.epoch = key.second;
        row.count = bucket.losses.size();
        auto [lm, lv] = mean_var(bucket.losses);
        row.loss_mean = lm;
        row.loss_var = lv;
        if (!bucket.metrics.empty()) {
            auto [mm, mv] = mean_var(bucket.metrics);
            row.metric_mean = mm;
            row.metric_var = mv;
        }
    }
    return rows;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "config_label,epoch,count,loss_mean,loss_var,metric_mean,metric_var\n";
    for (const auto& r : rows) {
        out += r.config_label;
        out += ',';
        out += std::to_string(r.epoch);
        out += ',';
        out += std::to_string(r.count);
        out += ',';
        out += format_real(r.loss_mean);
        out += ',';
        out += format_real(r.loss_var);
        out += ',';
        if (r.metric_mean.has_value()) out += format_real(*r.metric_mean);
        out += ',';
        if (r.metric_var.has_value()) out += format_real(*r.metric_var);
        out += '\n';
    }
    return out;
}

void write_aggregate(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_aggregate: cannot open " + path.string());
    out << aggregate_to_csv(rows);
    if (!out) throw std::runtime_error("write_aggregate: write failed for " + path.string());
}

}  // namespace popt
