#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popt {

/// One evaluation row. (run_id, epoch) pairs are unique within a file.
struct RunRecord {
    std::string run_id;
    std::string config_label;
    std::int64_t epoch = 0;
    double loss = 0.0;
    std::optional<double> metric;
    std::int64_t wall_ms = 0;
    std::uint64_t seed = 0;
};

enum class RecordFormat { Csv, Json };

RecordFormat record_format_from_string(std::string_view name);

inline constexpr char kRecordCsvHeader[] = "run_id,config_label,epoch,loss,metric,wall_ms,seed";

/// Reals rendered with 17 significant digits (round-trip exact).
std::string format_real(double v);

/// Fixed-header CSV with '\n' newlines; an absent metric renders as an
/// empty field.
std::string records_to_csv(const std::vector<RunRecord>& records);

/// Array of objects with the CSV's keys; absent metric renders as null.
std::string records_to_json(const std::vector<RunRecord>& records);

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path,
                   RecordFormat format);

/// Per-(config_label, epoch) mean and sample variance across replicate
/// record sets, ordered by first appearance.
struct AggregateRow {
    std::string config_label;
    std::int64_t epoch = 0;
    std::size_t count = 0;
    double loss_mean = 0.0;
    double loss_var = 0.0;
    std::optional<double> metric_mean;
    std::optional<double> metric_var;
};

std::vector<AggregateRow> aggregate_records(const std::vector<std::vector<RunRecord>>& replicates);

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

void write_aggregate(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);

}  // namespace popt
