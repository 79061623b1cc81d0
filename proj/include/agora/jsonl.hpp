#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agora/dataset.hpp"

namespace agora {

// Canonical dataset record: one JSON object per line with keys
// {id, instruction, response, origin, generator_id, setting}; absent optional
// fields are encoded as null. Field order is fixed so that equal datasets
// serialize to identical bytes.
std::string instance_to_line(const Instance& inst);
Instance instance_from_line(const std::string& line);

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path);

// `format` is "canonical" or "minimal". Minimal records carry only
// {instruction, response}; ids are auto-assigned "seed-000000", ...
// Malformed lines raise an Error naming the 1-based line number; an empty
// file yields an empty dataset and a warning.
Dataset read_dataset(std::istream& in, DatasetKind kind, Domain domain,
                     const std::string& format = "canonical",
                     std::vector<std::string>* warnings = nullptr);
Dataset read_dataset_file(const std::filesystem::path& path, DatasetKind kind, Domain domain,
                          const std::string& format = "canonical",
                          std::vector<std::string>* warnings = nullptr);

// Score-record file: line-delimited
// {benchmark, generator_id, setting, score_base, score_trained, score_ref}.
std::string score_record_to_line(const ScoreRecord& record);
ScoreRecord score_record_from_line(const std::string& line);
std::vector<ScoreRecord> read_score_records(std::istream& in);
std::vector<ScoreRecord> read_score_records_file(const std::filesystem::path& path);
void write_score_records_file(const std::vector<ScoreRecord>& records,
                              const std::filesystem::path& path);

// Corpus metric summary: one MetricVector record per line keyed by
// (generator_id, setting); missing metrics are null.
std::string metric_vector_to_line(const MetricVector& mv);
MetricVector metric_vector_from_line(const std::string& line);
std::vector<MetricVector> read_metric_vectors_file(const std::filesystem::path& path);
void write_metric_vectors_file(const std::vector<MetricVector>& rows,
                               const std::filesystem::path& path);

}  // namespace agora
