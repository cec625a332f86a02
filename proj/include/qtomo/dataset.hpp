#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qtomo {

// One directory holding a plain-text manifest plus one raw array file per
// named array. Arrays are little-endian 64-bit floats, row-major. Manifest
// lines:
//   qtomo-container 1
//   meta <key> <value...>
//   array <name> <file> f64 <rank> <d0> <d1> ...
// Writes go through a temp file + rename so readers never see partial data.
class DatasetContainer {
 public:
  struct ArrayRecord {
    std::string file;
    std::vector<long> shape;
    long element_count() const;
  };

  static DatasetContainer create(const std::filesystem::path& dir);
  static DatasetContainer open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }

  void put_array(const std::string& name, const double* data, const std::vector<long>& shape);
  void put_array(const std::string& name, const std::vector<double>& data,
                 const std::vector<long>& shape);
  std::vector<double> get_array(const std::string& name, std::vector<long>* shape = nullptr) const;
  bool has_array(const std::string& name) const;
  const std::map<std::string, ArrayRecord>& arrays() const { return arrays_; }

  void set_meta(const std::string& key, const std::string& value);
  std::string meta(const std::string& key) const; // throws DataError if absent
  bool has_meta(const std::string& key) const;

  // Serializes the manifest (atomic). Call after the last put/set.
  void finalize();

 private:
  std::filesystem::path dir_;
  std::map<std::string, ArrayRecord> arrays_;
  std::map<std::string, std::string> meta_;
};

// Atomic small-file write helper (temp + rename), used for all text outputs.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

} // namespace qtomo
