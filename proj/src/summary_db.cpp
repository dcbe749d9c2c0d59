// summary_db.cpp - on-disk summary databases
//
// Layout: a text header, then one record per summary. A record is a line
// holding the byte length of its JSON payload followed by the payload and a
// newline, so a truncated file is detected before any JSON is parsed.
//
//   DIVERGE-SUMMARY-DB
//   format 1
//   tool diverge 1.0.0
//   fingerprint 0123456789abcdef
//   count 2
//   <bytes>
//   {...}

#include "diverge/summary_db.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "diverge/report.hpp"

namespace diverge {

namespace {

constexpr const char* kMagic = "DIVERGE-SUMMARY-DB";
constexpr int kFormat = 1;

std::string expect_field(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw CorruptDb("summary db: missing '" + name + "' line");
  if (line.rfind(name + " ", 0) != 0)
    throw CorruptDb("summary db: expected '" + name + "', found '" + line + "'");
  return line.substr(name.size() + 1);
}

}  // namespace

std::string serialize_db(const SummaryDb& db) {
  std::ostringstream out;
  out << kMagic << "\nformat " << kFormat << "\ntool " << kToolVersion << "\nfingerprint "
      << db.fingerprint << "\ncount " << db.all().size() << "\n";
  for (const auto& [name, s] : db.all()) {
    std::string payload = to_json(s).dump();
    out << payload.size() << "\n" << payload << "\n";
  }
  return out.str();
}

SummaryDb deserialize_db(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw CorruptDb("summary db: bad magic line");
  if (expect_field(in, "format") != std::to_string(kFormat))
    throw VersionMismatch("summary db: unsupported format");
  std::string tool = expect_field(in, "tool");
  if (tool != kToolVersion)
    throw VersionMismatch("summary db written by '" + tool + "', expected '" + kToolVersion + "'");
  SummaryDb db;
  db.fingerprint = expect_field(in, "fingerprint");
  std::size_t count = 0;
  try {
    count = std::stoul(expect_field(in, "count"));
  } catch (const std::logic_error&) {
    throw CorruptDb("summary db: bad count");
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw CorruptDb("summary db: truncated");
    std::size_t len = 0;
    try {
      len = std::stoul(line);
    } catch (const std::logic_error&) {
      throw CorruptDb("summary db: bad record length");
    }
    std::string payload(len, '\0');
    if (!in.read(payload.data(), static_cast<std::streamsize>(len)) || in.get() != '\n')
      throw CorruptDb("summary db: truncated record");
    try {
      Summary s = summary_from_json(json::parse(payload));
      if (db.contains(s.procedure)) throw CorruptDb("summary db: duplicate " + s.procedure);
      db.put(std::move(s));
    } catch (const json::exception& e) {
      throw CorruptDb(std::string("summary db: ") + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptDb("summary db: trailing data");
  return db;
}

void save_db(const SummaryDb& db, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << serialize_db(db);
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot replace " + path);
}

SummaryDb load_db(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_db(buf.str());
}

}  // namespace diverge
