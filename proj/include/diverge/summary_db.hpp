// summary_db.hpp - JSON encoding of analysis results and on-disk summary databases

#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

#include "diverge/interproc.hpp"

namespace diverge {

using json = nlohmann::ordered_json;

json to_json(const Term& t);
Term term_from_json(const json& j);
json to_json(const Atom& a);
Atom atom_from_json(const json& j);
json to_json(const PathCondition& pc);
PathCondition pc_from_json(const json& j);
json to_json(const Spec& s);
Spec spec_from_json(const json& j);
json to_json(const Issue& i);
Issue issue_from_json(const json& j);
json to_json(const Summary& s);
Summary summary_from_json(const json& j);

/// The database was written by another tool version or for other sources.
class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The database file is truncated or malformed.
class CorruptDb : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_db(const SummaryDb& db);
/// Throws CorruptDb or VersionMismatch (tool version differs).
SummaryDb deserialize_db(const std::string& bytes);

void save_db(const SummaryDb& db, const std::string& path);
SummaryDb load_db(const std::string& path);

}  // namespace diverge
