#include "cicam/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "cicam/errors.hpp"

namespace cicam {

namespace {

constexpr char kMagic[8] = {'C', 'I', 'C', 'K', 'P', 'T', '1', '\n'};

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void Checkpoint::put_tensor(const std::string& name, const Tensor& t) {
  Entry e;
  e.dtype = Dtype::f64;
  e.shape = t.shape;
  e.raw.resize(t.numel() * sizeof(double));
  std::memcpy(e.raw.data(), t.data(), e.raw.size());
  entries_[name] = std::move(e);
}

void Checkpoint::put_tensor_f32(const std::string& name, const Tensor& t) {
  Entry e;
  e.dtype = Dtype::f32;
  e.shape = t.shape;
  e.raw.resize(t.numel() * sizeof(float));
  auto* out = reinterpret_cast<float*>(e.raw.data());
  for (std::size_t i = 0; i < t.numel(); ++i) out[i] = static_cast<float>(t.v[i]);
  entries_[name] = std::move(e);
}

void Checkpoint::put_scalar(const std::string& name, double v) {
  Tensor t({1});
  t.at(0) = v;
  put_tensor(name, t);
}

void Checkpoint::put_int(const std::string& name, std::int64_t v) {
  Entry e;
  e.dtype = Dtype::i64;
  e.shape = {1};
  e.raw.resize(sizeof(std::int64_t));
  std::memcpy(e.raw.data(), &v, sizeof(v));
  entries_[name] = std::move(e);
}

void Checkpoint::put_bytes(const std::string& name, const std::string& data) {
  Entry e;
  e.dtype = Dtype::bytes;
  e.shape = {static_cast<int>(data.size())};
  e.raw.assign(data.begin(), data.end());
  entries_[name] = std::move(e);
}

const Checkpoint::Entry& Checkpoint::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ValidationError("checkpoint entry missing: " + name);
  return it->second;
}

Tensor Checkpoint::get_tensor(const std::string& name) const {
  const Entry& e = entry(name);
  Tensor t(e.shape);
  if (e.dtype == Dtype::f64) {
    std::memcpy(t.data(), e.raw.data(), e.raw.size());
  } else if (e.dtype == Dtype::f32) {
    const auto* in = reinterpret_cast<const float*>(e.raw.data());
    for (std::size_t i = 0; i < t.numel(); ++i) t.v[i] = in[i];
  } else {
    throw ValidationError("checkpoint entry is not a tensor: " + name);
  }
  return t;
}

double Checkpoint::get_scalar(const std::string& name) const {
  Tensor t = get_tensor(name);
  if (t.numel() != 1) throw ValidationError("checkpoint entry is not scalar: " + name);
  return t.at(0);
}

std::int64_t Checkpoint::get_int(const std::string& name) const {
  const Entry& e = entry(name);
  if (e.dtype != Dtype::i64) throw ValidationError("checkpoint entry is not i64: " + name);
  std::int64_t v;
  std::memcpy(&v, e.raw.data(), sizeof(v));
  return v;
}

std::string Checkpoint::get_bytes(const std::string& name) const {
  const Entry& e = entry(name);
  if (e.dtype != Dtype::bytes)
    throw ValidationError("checkpoint entry is not bytes: " + name);
  return std::string(e.raw.begin(), e.raw.end());
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write checkpoint: " + path);
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [name, e] : entries_) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<std::uint8_t>(os, static_cast<std::uint8_t>(e.dtype));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.shape.size()));
    for (int d : e.shape) write_pod<std::int32_t>(os, d);
    write_pod<std::uint64_t>(os, e.raw.size());
    os.write(reinterpret_cast<const char*>(e.raw.data()),
             static_cast<std::streamsize>(e.raw.size()));
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ValidationError("not a checkpoint file: " + path);

  Checkpoint ck;
  auto count = read_pod<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name_len = read_pod<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    Entry e;
    e.dtype = static_cast<Dtype>(read_pod<std::uint8_t>(is));
    auto ndim = read_pod<std::uint32_t>(is);
    e.shape.resize(ndim);
    for (auto& d : e.shape) d = read_pod<std::int32_t>(is);
    auto raw_len = read_pod<std::uint64_t>(is);
    e.raw.resize(raw_len);
    is.read(reinterpret_cast<char*>(e.raw.data()), static_cast<std::streamsize>(raw_len));
    if (!is) throw ValidationError("truncated checkpoint: " + path);
    ck.entries_[name] = std::move(e);
  }
  return ck;
}

}  // namespace cicam
