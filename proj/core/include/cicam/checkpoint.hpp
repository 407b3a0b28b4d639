#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cicam/tensor.hpp"

namespace cicam {

// Self-describing binary container: path -> dtype + shape + raw values.
// Training state is stored as f64 so resuming reproduces an uninterrupted run
// bit for bit; f32 entries are supported for compact exports.
class Checkpoint {
 public:
  enum class Dtype : std::uint8_t { f64 = 0, f32 = 1, i64 = 2, bytes = 3 };

  struct Entry {
    Dtype dtype;
    std::vector<int> shape;
    std::vector<std::uint8_t> raw;
  };

  void put_tensor(const std::string& name, const Tensor& t);
  void put_tensor_f32(const std::string& name, const Tensor& t);
  void put_scalar(const std::string& name, double v);
  void put_int(const std::string& name, std::int64_t v);
  void put_bytes(const std::string& name, const std::string& data);

  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  Tensor get_tensor(const std::string& name) const;
  double get_scalar(const std::string& name) const;
  std::int64_t get_int(const std::string& name) const;
  std::string get_bytes(const std::string& name) const;

  std::vector<std::string> names() const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  const Entry& entry(const std::string& name) const;
  std::map<std::string, Entry> entries_;
};

}  // namespace cicam
