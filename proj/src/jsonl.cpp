#include "agora/jsonl.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace agora {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json parse_line(const std::string& line, std::size_t line_no) {
    ordered_json j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": malformed record");
    return j;
}

std::string require_string(const ordered_json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": malformed record (missing '" +
                                       key + "')");
    return it->get<std::string>();
}

double require_number(const ordered_json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number())
        throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": malformed record (missing '" +
                                       key + "')");
    return it->get<double>();
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

Instance instance_from_json(const ordered_json& j, std::size_t line_no) {
    Instance inst;
    inst.id = require_string(j, "id", line_no);
    inst.instruction = require_string(j, "instruction", line_no);
    if (auto it = j.find("response"); it != j.end() && !it->is_null()) {
        if (!it->is_string())
            throw Error(ErrorKind::Io,
                        "line " + std::to_string(line_no) + ": malformed record ('response')");
        inst.response = it->get<std::string>();
    }
    inst.origin = origin_from_string(require_string(j, "origin", line_no));
    if (auto it = j.find("generator_id"); it != j.end() && !it->is_null())
        inst.generator_id = it->get<std::string>();
    if (auto it = j.find("setting"); it != j.end() && !it->is_null())
        inst.setting = SettingKey::from_slug(it->get<std::string>());
    return inst;
}

}  // namespace

std::string instance_to_line(const Instance& inst) {
    ordered_json j;
    j["id"] = inst.id;
    j["instruction"] = inst.instruction;
    j["response"] = inst.response.has_value() ? ordered_json(*inst.response) : ordered_json(nullptr);
    j["origin"] = to_string(inst.origin);
    j["generator_id"] =
        inst.generator_id.has_value() ? ordered_json(*inst.generator_id) : ordered_json(nullptr);
    j["setting"] = inst.setting.has_value() ? ordered_json(inst.setting->slug()) : ordered_json(nullptr);
    return j.dump();
}

Instance instance_from_line(const std::string& line) {
    return instance_from_json(parse_line(line, 1), 1);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
    for (const Instance& inst : dataset.instances) out << instance_to_line(inst) << '\n';
}

void write_dataset_file(const Dataset& dataset, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_dataset(dataset, out);
}

Dataset read_dataset(std::istream& in, DatasetKind kind, Domain domain, const std::string& format,
                     std::vector<std::string>* warnings) {
    if (format != "canonical" && format != "minimal")
        throw Error(ErrorKind::Config, "unknown ingest format '" + format + "'");
    Dataset ds;
    ds.kind = kind;
    ds.domain = domain;
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t auto_id = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j = parse_line(line, line_no);
        if (format == "canonical") {
            ds.instances.push_back(instance_from_json(j, line_no));
        } else {
            Instance inst;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "seed-%06llu",
                          static_cast<unsigned long long>(auto_id++));
            inst.id = buf;
            inst.instruction = require_string(j, "instruction", line_no);
            if (auto it = j.find("response"); it != j.end() && !it->is_null())
                inst.response = it->get<std::string>();
            inst.origin = Origin::Seed;
            ds.instances.push_back(std::move(inst));
        }
    }
    if (ds.instances.empty() && warnings)
        warnings->push_back("dataset is empty");
    std::unordered_map<std::string, std::size_t> seen;
    for (const Instance& inst : ds.instances) {
        if (!seen.emplace(inst.id, 1).second)
            throw Error(ErrorKind::Io, "duplicate id '" + inst.id + "'");
    }
    return ds;
}

Dataset read_dataset_file(const std::filesystem::path& path, DatasetKind kind, Domain domain,
                          const std::string& format, std::vector<std::string>* warnings) {
    auto in = open_input(path);
    return read_dataset(in, kind, domain, format, warnings);
}

std::string score_record_to_line(const ScoreRecord& r) {
    ordered_json j;
    j["benchmark"] = r.benchmark;
    j["generator_id"] = r.generator_id;
    j["setting"] = r.setting.slug();
    j["score_base"] = r.score_base;
    j["score_trained"] = r.score_trained;
    j["score_ref"] = r.score_ref;
    return j.dump();
}

ScoreRecord score_record_from_line(const std::string& line) {
    ordered_json j = parse_line(line, 1);
    ScoreRecord r;
    r.benchmark = require_string(j, "benchmark", 1);
    r.generator_id = require_string(j, "generator_id", 1);
    r.setting = SettingKey::from_slug(require_string(j, "setting", 1));
    r.score_base = require_number(j, "score_base", 1);
    r.score_trained = require_number(j, "score_trained", 1);
    r.score_ref = require_number(j, "score_ref", 1);
    return r;
}

std::vector<ScoreRecord> read_score_records(std::istream& in) {
    std::vector<ScoreRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(score_record_from_line(line));
        } catch (const Error& e) {
            throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::vector<ScoreRecord> read_score_records_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_score_records(in);
}

void write_score_records_file(const std::vector<ScoreRecord>& records,
                              const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const ScoreRecord& r : records) out << score_record_to_line(r) << '\n';
}

std::string metric_vector_to_line(const MetricVector& mv) {
    ordered_json j;
    j["generator_id"] = mv.generator_id;
    j["setting"] = mv.setting.slug();
    const auto& names = MetricVector::feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto v = mv.feature(i);
        j[names[i]] = v.has_value() ? ordered_json(*v) : ordered_json(nullptr);
    }
    return j.dump();
}

MetricVector metric_vector_from_line(const std::string& line) {
    ordered_json j = parse_line(line, 1);
    MetricVector mv;
    mv.generator_id = require_string(j, "generator_id", 1);
    mv.setting = SettingKey::from_slug(require_string(j, "setting", 1));
    const auto& names = MetricVector::feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (auto it = j.find(names[i]); it != j.end() && !it->is_null())
            mv.set_feature(i, it->get<double>());
    }
    return mv;
}

std::vector<MetricVector> read_metric_vectors_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<MetricVector> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            rows.push_back(metric_vector_from_line(line));
        } catch (const Error& e) {
            throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return rows;
}

void write_metric_vectors_file(const std::vector<MetricVector>& rows,
                               const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const MetricVector& mv : rows) out << metric_vector_to_line(mv) << '\n';
}

}  // namespace agora
