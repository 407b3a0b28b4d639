#include "cicam/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "cicam/errors.hpp"
#include "cicam/hash.hpp"
#include "cicam/image_io.hpp"
#include "cicam/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cicam {

namespace {

struct Rgb {
  double r, g, b;
};

// One saturated hue per foreground shape; textures stay in a muted band so a
// small CNN can separate shape from context.
constexpr Rgb kShapeColor[kShapeInventory] = {
    {0.85, 0.15, 0.15},  // disk
    {0.15, 0.80, 0.20},  // square
    {0.20, 0.30, 0.90},  // triangle
    {0.90, 0.85, 0.15},  // cross
    {0.85, 0.20, 0.80},  // ring
};

constexpr Rgb kTextureTint[kShapeInventory] = {
    {0.55, 0.50, 0.45}, {0.45, 0.55, 0.50}, {0.50, 0.45, 0.55},
    {0.55, 0.55, 0.45}, {0.45, 0.50, 0.55},
};

double texture_value(int tex, int x, int y, int size) {
  const double pi2 = 2.0 * 3.14159265358979323846;
  switch (tex) {
    case 0:
      return std::sin(pi2 * 0.14 * y);
    case 1:
      return std::sin(pi2 * 0.11 * x);
    case 2:
      return std::sin(pi2 * 0.09 * (x + y));
    case 3:
      return std::sin(pi2 * 0.12 * x) * std::sin(pi2 * 0.12 * y);
    default: {
      double cx = 0.5 * (size - 1), cy = 0.5 * (size - 1);
      double r = std::hypot(x - cx, y - cy);
      return std::sin(pi2 * 0.10 * r);
    }
  }
}

bool shape_mask(int shape, int u, int v, int side) {
  double c = 0.5 * (side - 1);
  double r = 0.5 * side;
  double du = u - c, dv = v - c;
  switch (shape) {
    case 0:  // disk
      return du * du + dv * dv <= r * r;
    case 1:  // square
      return true;
    case 2: {  // upward triangle with apex at top-center
      // Inside iff below both slanted edges (v grows downward).
      double t = static_cast<double>(v) / std::max(1, side - 1);
      double half = t * c;
      return std::abs(du) <= half;
    }
    case 3: {  // plus sign
      double arm = 0.18 * side;
      return std::abs(du) <= arm || std::abs(dv) <= arm;
    }
    default: {  // ring
      double d2 = du * du + dv * dv;
      double r_in = 0.55 * r;
      return d2 <= r * r && d2 >= r_in * r_in;
    }
  }
}

double quantize8(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return std::lround(v * 255.0) / 255.0;
}

Sample render_sample(const SceneSpec& spec, double rate, std::uint64_t stream) {
  Rng rng = make_rng(spec.seed, stream);
  const int size = spec.image_size;

  std::uniform_int_distribution<int> class_dist(0, spec.num_classes - 1);
  int label = class_dist(rng);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int tex;
  if (unit(rng) < rate) {
    tex = label;
  } else {
    std::uniform_int_distribution<int> other(0, spec.num_classes - 2);
    tex = other(rng);
    if (tex >= label) ++tex;
  }

  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  int side = static_cast<int>(std::lround(size * spec.foreground_scale * jitter(rng)));
  side = std::clamp(side, 6, size - 2);
  std::uniform_int_distribution<int> pos(0, size - side);
  int x0 = pos(rng), y0 = pos(rng);

  Sample s;
  s.label = label;
  s.texture_id = tex;
  s.image = Tensor({3, size, size});

  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  const Rgb tint = kTextureTint[tex];
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double t = 0.12 * texture_value(tex, x, y, size);
      double n = noise(rng);
      s.image.at(0, y, x) = quantize8(tint.r + t + n);
      s.image.at(1, y, x) = quantize8(tint.g + t + n);
      s.image.at(2, y, x) = quantize8(tint.b + t + n);
    }

  const Rgb col = kShapeColor[label];
  int mn_x = size, mn_y = size, mx_x = -1, mx_y = -1;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u) {
      if (!shape_mask(label, u, v, side)) continue;
      int x = x0 + u, y = y0 + v;
      s.image.at(0, y, x) = quantize8(col.r);
      s.image.at(1, y, x) = quantize8(col.g);
      s.image.at(2, y, x) = quantize8(col.b);
      mn_x = std::min(mn_x, x);
      mn_y = std::min(mn_y, y);
      mx_x = std::max(mx_x, x);
      mx_y = std::max(mx_y, y);
    }
  s.gt_box = {mn_x, mn_y, mx_x + 1, mx_y + 1};
  return s;
}

}  // namespace

void SceneSpec::validate() const {
  if (image_size < 16) throw ValidationError("image_size must be >= 16");
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");
  if (num_classes > kShapeInventory)
    throw ValidationError("num_classes exceeds shape/texture inventory of " +
                          std::to_string(kShapeInventory));
  if (cooccurrence_rate < 0.0 || cooccurrence_rate > 1.0)
    throw ValidationError("cooccurrence_rate must be in [0,1]");
  if (foreground_scale < 0.2 || foreground_scale > 0.6)
    throw ValidationError("foreground_scale must be in [0.2, 0.6]");
}

std::vector<Sample> generate_dataset(const SceneSpec& spec, int count, Split split,
                                     double override_rate) {
  spec.validate();
  if (count < 1) throw ValidationError("count must be >= 1");
  if (override_rate > 1.0) throw ValidationError("override rate must be <= 1");

  double rate = spec.cooccurrence_rate;
  if (split == Split::test) rate = 1.0 / spec.num_classes;
  if (override_rate >= 0.0) rate = override_rate;

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uint64_t split_tag = split == Split::test ? 1 : 0;
  for (int i = 0; i < count; ++i)
    out.push_back(render_sample(spec, rate, 2 * static_cast<std::uint64_t>(i) + split_tag));
  return out;
}

void save_dataset(const std::string& dir, const std::vector<Sample>& samples) {
  fs::create_directories(dir);
  json manifest = json::array();
  char name[32];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(name, sizeof(name), "sample_%06zu.png", i);
    write_png(dir + "/" + name, tensor_to_u8(samples[i].image));
    const BoundingBox& b = samples[i].gt_box;
    manifest.push_back({{"file", name},
                        {"label", samples[i].label},
                        {"gt_box", {b.x_min, b.y_min, b.x_max, b.y_max}}});
  }
  std::ofstream f(dir + "/manifest.json");
  f << manifest.dump(2) << "\n";
}

std::vector<Sample> load_dataset(const std::string& dir) {
  std::ifstream f(dir + "/manifest.json");
  if (!f) throw ValidationError("no manifest.json in " + dir);
  json manifest = json::parse(f);

  std::vector<Sample> out;
  out.reserve(manifest.size());
  for (const auto& entry : manifest) {
    Sample s;
    s.label = entry.at("label").get<int>();
    auto box = entry.at("gt_box");
    s.gt_box = {box.at(0).get<int>(), box.at(1).get<int>(), box.at(2).get<int>(),
                box.at(3).get<int>()};
    s.texture_id = -1;  // not persisted
    s.image = u8_to_tensor(read_png(dir + "/" + entry.at("file").get<std::string>()));
    out.push_back(std::move(s));
  }
  return out;
}

std::string dataset_hash(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());

  Fnv64 h;
  for (const auto& n : names) {
    h.update(n);
    std::ifstream f(dir + "/" + n, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    h.update(bytes);
  }
  return h.hex();
}

}  // namespace cicam
