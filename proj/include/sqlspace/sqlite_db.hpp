#pragma once

#include <string>

struct sqlite3;

namespace sqlspace {

/// Move-only RAII handle over a read-only sqlite3 connection.
class SqliteDb {
 public:
  static SqliteDb open_readonly(const std::string& path);

  SqliteDb() = default;
  SqliteDb(SqliteDb&& other) noexcept;
  SqliteDb& operator=(SqliteDb&& other) noexcept;
  SqliteDb(const SqliteDb&) = delete;
  SqliteDb& operator=(const SqliteDb&) = delete;
  ~SqliteDb();

  sqlite3* handle() const { return db_; }
  const std::string& path() const { return path_; }

 private:
  sqlite3* db_ = nullptr;
  std::string path_;
};

}  // namespace sqlspace
