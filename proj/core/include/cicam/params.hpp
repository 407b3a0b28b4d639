#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cicam/errors.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

// One named learnable tensor plus its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Flat registry of parameters. Addresses are stable after add(), so modules
// keep raw Param* handles. Names double as checkpoint paths.
class ParamStore {
 public:
  Param& add(const std::string& name, std::vector<int> shape) {
    for (const auto& p : params_)
      if (p->name == name) throw ValidationError("duplicate param: " + name);
    auto p = std::make_unique<Param>();
    p->name = name;
    p->value = Tensor(shape);
    p->grad = Tensor(std::move(shape));
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Param& get(const std::string& name) {
    for (const auto& p : params_)
      if (p->name == name) return *p;
    throw ValidationError("unknown param: " + name);
  }

  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.numel();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->grad.zero();
  }

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

}  // namespace cicam
