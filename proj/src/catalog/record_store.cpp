#include "djfam/catalog/record_store.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <unistd.h>

#include "djfam/common/error.hpp"

namespace djfam::catalog {

FileRecordStore::FileRecordStore(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

FileRecordStore::~FileRecordStore() {
  if (out_) std::fclose(out_);
}

void FileRecordStore::open_for_append() {
  if (out_) return;
  out_ = std::fopen(path_.c_str(), "ab");
  if (!out_) fail(ErrorCode::kIo, "cannot open " + path_.string() + " for append");
}

std::vector<Record> FileRecordStore::load() {
  std::lock_guard lock(mu_);
  std::vector<Record> out;
  std::ifstream in(path_);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto record = Record::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // torn tail
      fail(ErrorCode::kIo, "corrupt record in " + path_.string());
    }
    out.push_back(std::move(record));
  }
  return out;
}

void FileRecordStore::append(const Record& record) {
  std::lock_guard lock(mu_);
  open_for_append();
  const std::string line = record.dump() + '\n';
  if (std::fwrite(line.data(), 1, line.size(), out_) != line.size() || std::fflush(out_) != 0) {
    fail(ErrorCode::kIo, "append to " + path_.string() + " failed");
  }
}

void FileRecordStore::rewrite(const std::vector<Record>& records) {
  std::lock_guard lock(mu_);
  const auto tmp = std::filesystem::path(path_.string() + ".tmp");
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) fail(ErrorCode::kIo, "cannot write " + tmp.string());
  bool ok = true;
  for (const auto& r : records) {
    const std::string line = r.dump() + '\n';
    ok = ok && std::fwrite(line.data(), 1, line.size(), f) == line.size();
  }
  ok = ok && std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) fail(ErrorCode::kIo, "compaction write to " + tmp.string() + " failed");

  if (out_) {
    std::fclose(out_);
    out_ = nullptr;
  }
  std::filesystem::rename(tmp, path_);
}

std::vector<Record> MemoryRecordStore::load() {
  std::lock_guard lock(mu_);
  return records_;
}

void MemoryRecordStore::append(const Record& record) {
  std::lock_guard lock(mu_);
  records_.push_back(record);
}

void MemoryRecordStore::rewrite(const std::vector<Record>& records) {
  std::lock_guard lock(mu_);
  records_ = records;
}

std::size_t MemoryRecordStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

}  // namespace djfam::catalog
