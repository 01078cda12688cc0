#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <vector>

#include "json.hpp"

namespace djfam::catalog {

using Record = nlohmann::json;

/// Append-only log of JSON records. Owners replay `load()` on startup and
/// periodically `rewrite()` a compacted snapshot.
class RecordStore {
 public:
  virtual ~RecordStore() = default;

  virtual std::vector<Record> load() = 0;
  virtual void append(const Record& record) = 0;
  /// Atomically replaces the whole log with `records`.
  virtual void rewrite(const std::vector<Record>& records) = 0;
};

/// JSON-lines file. A torn final line (crash during append) is ignored on
/// load; rewrites go to a temporary file that is renamed into place.
class FileRecordStore final : public RecordStore {
 public:
  explicit FileRecordStore(std::filesystem::path path);
  ~FileRecordStore() override;

  std::vector<Record> load() override;
  void append(const Record& record) override;
  void rewrite(const std::vector<Record>& records) override;

  const std::filesystem::path& path() const { return path_; }

 private:
  void open_for_append();

  std::filesystem::path path_;
  std::mutex mu_;
  std::FILE* out_ = nullptr;
};

class MemoryRecordStore final : public RecordStore {
 public:
  std::vector<Record> load() override;
  void append(const Record& record) override;
  void rewrite(const std::vector<Record>& records) override;

  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<Record> records_;
};

}  // namespace djfam::catalog
