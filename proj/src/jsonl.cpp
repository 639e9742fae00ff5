#include "sqlspace/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "sqlspace/common.hpp"

namespace sqlspace {

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open jsonl file: ", path);
  std::vector<json> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    json j = json::parse(t, nullptr, false);
    if (j.is_discarded()) fail("invalid json at ", path, ":", lineno);
    rows.push_back(std::move(j));
  }
  return rows;
}

std::string dump_jsonl(const std::vector<json>& rows) {
  std::ostringstream oss;
  for (const json& r : rows) oss << r.dump() << "\n";
  return oss.str();
}

void write_jsonl_atomic(const std::string& path, const std::vector<json>& rows) {
  write_file_atomic(path, dump_jsonl(rows));
}

std::string canonical_dump(const json& j) { return j.dump(); }

}  // namespace sqlspace
