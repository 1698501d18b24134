#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssql/error.hpp"
#include "ssql/rerank.hpp"
#include "ssql/schema.hpp"

#include <nlohmann/json.hpp>

namespace ssql {

/// One corpus record: a question with its gold SQL and optionally a
/// pre-lowered SSQL form.
struct CorpusEntry {
    std::string db_id;
    std::string question;
    std::string sql;
    std::optional<std::string> ssql;
};

inline std::vector<CorpusEntry> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
    std::vector<CorpusEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            CorpusEntry e;
            e.db_id = j.at("db_id").get<std::string>();
            e.question = j.value("question", std::string{});
            e.sql = j.at("sql").get<std::string>();
            if (j.contains("ssql")) e.ssql = j["ssql"].get<std::string>();
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorCode::MalformedBeamFile,
                        "corpus line " + std::to_string(lineno) + ": " + ex.what(), lineno);
        }
    }
    return out;
}

/// Beam dump: one JSON object per line with question, db_id and beams as
/// [{sql, logprob, correct?}], logprob being ln g. Beams must arrive sorted
/// by descending score.
inline std::vector<BeamSet> load_beam_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
    std::vector<BeamSet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& why) -> Error {
            return Error(ErrorCode::MalformedBeamFile,
                         "beam line " + std::to_string(lineno) + ": " + why, lineno);
        };
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            BeamSet set;
            set.question = j.at("question").get<std::string>();
            set.db_id = j.at("db_id").get<std::string>();
            const auto& beams = j.at("beams");
            if (!beams.is_array() || beams.empty()) throw fail("empty beams array");
            double prev = 0.0;
            bool first = true;
            for (const auto& b : beams) {
                BeamCandidate c;
                c.sql_text = b.at("sql").get<std::string>();
                double logprob = b.at("logprob").get<double>();
                if (logprob > 0.0) throw fail("logprob above 0 makes g exceed 1");
                if (!first && logprob > prev) throw fail("beams not sorted by descending score");
                prev = logprob;
                first = false;
                c.g = std::exp(logprob);
                if (c.g <= 0.0) c.g = std::numeric_limits<double>::min();
                if (b.contains("correct")) c.correct = b["correct"].get<bool>();
                set.candidates.push_back(std::move(c));
            }
            out.push_back(std::move(set));
        } catch (const Error&) {
            throw;
        } catch (const nlohmann::json::exception& ex) {
            throw fail(ex.what());
        }
    }
    return out;
}

inline void write_training_targets(std::ostream& out, const std::vector<TrainingTarget>& targets) {
    for (const auto& t : targets) {
        nlohmann::json j;
        j["question"] = t.question;
        j["sql"] = t.sql_text;
        j["schema"] = t.filtered_schema_text;
        j["target"] = t.target;
        out << j.dump() << "\n";
    }
}

/// All databases of one Spider tables file, with lookup by db_id.
class SchemaSet {
public:
    SchemaSet() = default;

    explicit SchemaSet(const std::string& path) : schemas_(load_all_schemas(path)) {
        for (std::size_t i = 0; i < schemas_.size(); ++i)
            index_[to_lower(schemas_[i].db_id)] = i;
    }

    const Schema& get(const std::string& db_id) const {
        auto it = index_.find(to_lower(db_id));
        if (it == index_.end())
            throw Error(ErrorCode::UnknownDbId, "db_id '" + db_id + "' not loaded");
        return schemas_[it->second];
    }

    const std::vector<Schema>& all() const { return schemas_; }

private:
    std::vector<Schema> schemas_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace ssql
