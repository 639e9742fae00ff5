#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sqlspace {

using json = nlohmann::json;

/// Reads one JSON object per non-empty line; errors carry the line number.
std::vector<json> read_jsonl(const std::string& path);

/// Serializes rows one per line (compact, keys sorted by nlohmann's object
/// ordering) and writes atomically.
void write_jsonl_atomic(const std::string& path, const std::vector<json>& rows);

std::string dump_jsonl(const std::vector<json>& rows);

/// Canonical compact dump used wherever bytes feed a hash.
std::string canonical_dump(const json& j);

}  // namespace sqlspace
