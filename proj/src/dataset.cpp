#include "qtomo/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qtomo/errors.hpp"

namespace qtomo {

namespace fs = std::filesystem;

long DatasetContainer::ArrayRecord::element_count() const {
  long n = 1;
  for (long d : shape) n *= d;
  return n;
}

void atomic_write_text(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

DatasetContainer DatasetContainer::create(const fs::path& dir) {
  fs::create_directories(dir);
  DatasetContainer c;
  c.dir_ = dir;
  return c;
}

DatasetContainer DatasetContainer::open(const fs::path& dir) {
  fs::path manifest = dir / "manifest.txt";
  std::ifstream in(manifest);
  if (!in) throw DataError("manifest not found: " + manifest.string());

  DatasetContainer c;
  c.dir_ = dir;
  std::string line;
  bool versioned = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "qtomo-container") {
      int version = 0;
      ss >> version;
      if (version != 1) throw DataError("unsupported container version in " + manifest.string());
      versioned = true;
    } else if (tag == "meta") {
      std::string key;
      ss >> key;
      std::string value;
      std::getline(ss, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      c.meta_[key] = value;
    } else if (tag == "array") {
      std::string name, file, dtype;
      int rank = 0;
      ss >> name >> file >> dtype >> rank;
      if (!ss || dtype != "f64") throw DataError("malformed array line: " + line);
      ArrayRecord rec;
      rec.file = file;
      rec.shape.resize(rank);
      for (int i = 0; i < rank; ++i) ss >> rec.shape[i];
      if (!ss) throw DataError("malformed array line: " + line);
      c.arrays_[name] = rec;
    } else {
      throw DataError("unknown manifest tag '" + tag + "' in " + manifest.string());
    }
  }
  if (!versioned) throw DataError("manifest missing version line: " + manifest.string());

  for (const auto& [name, rec] : c.arrays_) {
    fs::path p = dir / rec.file;
    if (!fs::exists(p)) throw DataError("missing array file " + p.string());
    auto expect = static_cast<uintmax_t>(rec.element_count()) * sizeof(double);
    if (fs::file_size(p) != expect)
      throw DataError("array " + name + " byte size mismatch: expected " +
                      std::to_string(expect) + ", found " + std::to_string(fs::file_size(p)));
  }
  return c;
}

void DatasetContainer::put_array(const std::string& name, const double* data,
                                 const std::vector<long>& shape) {
  ArrayRecord rec;
  rec.file = name + ".f64";
  rec.shape = shape;
  fs::path target = dir_ / rec.file;
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(rec.element_count() * sizeof(double)));
  }
  fs::rename(tmp, target);
  arrays_[name] = rec;
}

void DatasetContainer::put_array(const std::string& name, const std::vector<double>& data,
                                 const std::vector<long>& shape) {
  long n = 1;
  for (long d : shape) n *= d;
  if (n != static_cast<long>(data.size()))
    throw DataError("put_array " + name + ": data size does not match shape");
  put_array(name, data.data(), shape);
}

std::vector<double> DatasetContainer::get_array(const std::string& name,
                                                std::vector<long>* shape) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw DataError("array '" + name + "' not in container");
  if (shape) *shape = it->second.shape;
  std::ifstream in(dir_ / it->second.file, std::ios::binary);
  if (!in) throw DataError("cannot read array file for '" + name + "'");
  std::vector<double> data(it->second.element_count());
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!in) throw DataError("short read on array '" + name + "'");
  return data;
}

bool DatasetContainer::has_array(const std::string& name) const { return arrays_.count(name) > 0; }

void DatasetContainer::set_meta(const std::string& key, const std::string& value) {
  meta_[key] = value;
}

std::string DatasetContainer::meta(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw DataError("meta key '" + key + "' not in container");
  return it->second;
}

bool DatasetContainer::has_meta(const std::string& key) const { return meta_.count(key) > 0; }

void DatasetContainer::finalize() {
  std::ostringstream os;
  os << "qtomo-container 1\n";
  for (const auto& [key, value] : meta_) os << "meta " << key << " " << value << "\n";
  for (const auto& [name, rec] : arrays_) {
    os << "array " << name << " " << rec.file << " f64 " << rec.shape.size();
    for (long d : rec.shape) os << " " << d;
    os << "\n";
  }
  atomic_write_text(dir_ / "manifest.txt", os.str());
}

} // namespace qtomo
