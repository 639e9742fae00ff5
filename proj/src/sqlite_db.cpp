#include "sqlspace/sqlite_db.hpp"

#include <sqlite3.h>

#include <utility>

#include "sqlspace/common.hpp"

namespace sqlspace {

SqliteDb SqliteDb::open_readonly(const std::string& path) {
  if (!file_exists(path)) fail("sqlite database not found: ", path);
  sqlite3* db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "unknown error";
    if (db) sqlite3_close(db);
    fail("cannot open sqlite database ", path, ": ", msg);
  }
  SqliteDb out;
  out.db_ = db;
  out.path_ = path;
  return out;
}

SqliteDb::SqliteDb(SqliteDb&& other) noexcept
    : db_(std::exchange(other.db_, nullptr)), path_(std::move(other.path_)) {}

SqliteDb& SqliteDb::operator=(SqliteDb&& other) noexcept {
  if (this != &other) {
    if (db_) sqlite3_close(db_);
    db_ = std::exchange(other.db_, nullptr);
    path_ = std::move(other.path_);
  }
  return *this;
}

SqliteDb::~SqliteDb() {
  if (db_) sqlite3_close(db_);
}

}  // namespace sqlspace
