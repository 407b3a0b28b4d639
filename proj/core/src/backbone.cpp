#include "cicam/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "cicam/errors.hpp"
#include "cicam/layers.hpp"

namespace cicam {

void BackboneConfig::validate() const {
  if (stage_channels.size() < 2) throw ValidationError("need at least 2 stages");
  for (int c : stage_channels)
    if (c < 1) throw ValidationError("stage channels must be positive");
  if (convs_per_stage < 1) throw ValidationError("convs_per_stage must be >= 1");
  if (embed_ratio < 1) throw ValidationError("embed_ratio must be >= 1");
  for (int s : nonlocal_after_stage)
    if (s < 1 || s > static_cast<int>(stage_channels.size()))
      throw ValidationError("nonlocal stage index out of range");
}

Backbone::Backbone(ParamStore& store, const BackboneConfig& config, int in_channels)
    : config_(config), in_channels_(in_channels) {
  config_.validate();
  const int nstages = static_cast<int>(config_.stage_channels.size());
  stages_.resize(static_cast<std::size_t>(nstages));
  nonlocal_.resize(static_cast<std::size_t>(nstages));
  int cin = in_channels_;
  for (int s = 0; s < nstages; ++s) {
    int cout = config_.stage_channels[static_cast<std::size_t>(s)];
    for (int j = 0; j < config_.convs_per_stage; ++j) {
      std::string prefix = "backbone/stage" + std::to_string(s) + "/conv" + std::to_string(j);
      ConvLayer layer;
      layer.cin = j == 0 ? cin : cout;
      layer.cout = cout;
      layer.w = &store.add(prefix + "/w", {cout, layer.cin, 3, 3});
      layer.b = &store.add(prefix + "/b", {cout});
      stages_[static_cast<std::size_t>(s)].push_back(layer);
    }
    if (has_nonlocal(s))
      nonlocal_[static_cast<std::size_t>(s)].emplace(
          store, "backbone/nl" + std::to_string(s), cout, config_.embed_ratio);
    cin = cout;
  }
}

bool Backbone::has_nonlocal(int stage) const {
  return std::find(config_.nonlocal_after_stage.begin(),
                   config_.nonlocal_after_stage.end(),
                   stage + 1) != config_.nonlocal_after_stage.end();
}

void Backbone::init(Rng& rng) {
  for (auto& stage : stages_)
    for (auto& layer : stage) {
      std::normal_distribution<double> d(0.0, std::sqrt(2.0 / (layer.cin * 9)));
      for (double& v : layer.w->value.v) v = d(rng);
      layer.b->value.zero();
    }
  for (auto& nl : nonlocal_)
    if (nl) nl->init(rng);
}

FeatureMaps Backbone::forward(const Tensor& image, Cache* cache) const {
  if (image.dim(0) != in_channels_)
    throw ValidationError("backbone: wrong input channel count");
  int h = image.dim(1), w = image.dim(2);
  const int nstages = static_cast<int>(stages_.size());
  for (int s = 0; s < nstages; ++s) {
    if (h % 2 != 0 || w % 2 != 0)
      throw ValidationError("backbone: image size not divisible by total stride");
    h /= 2;
    w /= 2;
  }

  Cache local;
  Cache& cc = cache ? *cache : local;
  cc.conv_out.clear();
  cc.pool_out.assign(static_cast<std::size_t>(nstages), Tensor());
  cc.pool_argmax.assign(static_cast<std::size_t>(nstages), {});
  cc.nl_out.assign(static_cast<std::size_t>(nstages), Tensor());
  cc.nl_cache.assign(static_cast<std::size_t>(nstages), NonLocalBlock::Cache());

  const Tensor* cur = &image;
  int ch = image.dim(1), cw = image.dim(2);
  for (int s = 0; s < nstages; ++s) {
    for (const auto& layer : stages_[static_cast<std::size_t>(s)]) {
      Tensor out({layer.cout, ch, cw});
      conv3x3_forward(cur->data(), layer.cin, ch, cw, layer.w->value.data(),
                      layer.b->value.data(), layer.cout, out.data());
      relu_forward(out.data(), out.numel());
      cc.conv_out.push_back(std::move(out));
      cur = &cc.conv_out.back();
    }
    int cout = stages_[static_cast<std::size_t>(s)].back().cout;
    Tensor pooled({cout, ch / 2, cw / 2});
    cc.pool_argmax[static_cast<std::size_t>(s)].resize(pooled.numel());
    maxpool2x2_forward(cur->data(), cout, ch, cw, pooled.data(),
                       cc.pool_argmax[static_cast<std::size_t>(s)].data());
    ch /= 2;
    cw /= 2;
    cc.pool_out[static_cast<std::size_t>(s)] = std::move(pooled);
    cur = &cc.pool_out[static_cast<std::size_t>(s)];
    if (nonlocal_[static_cast<std::size_t>(s)]) {
      Tensor nlo({cout, ch, cw});
      nonlocal_[static_cast<std::size_t>(s)]->forward(
          cur->data(), ch, cw, nlo.data(),
          cache ? &cc.nl_cache[static_cast<std::size_t>(s)] : nullptr);
      cc.nl_out[static_cast<std::size_t>(s)] = std::move(nlo);
      cur = &cc.nl_out[static_cast<std::size_t>(s)];
    }
  }
  FeatureMaps fm;
  fm.t = *cur;
  return fm;
}

void Backbone::backward(const Tensor& image, const Cache& cc, const Tensor& dfeat) {
  const int nstages = static_cast<int>(stages_.size());
  const int cps = config_.convs_per_stage;
  Tensor dcur = dfeat;
  for (int s = nstages - 1; s >= 0; --s) {
    const Tensor& pooled = cc.pool_out[static_cast<std::size_t>(s)];
    int cout = pooled.dim(0), ph = pooled.dim(1), pw = pooled.dim(2);

    if (nonlocal_[static_cast<std::size_t>(s)]) {
      Tensor dpool({cout, ph, pw});
      nonlocal_[static_cast<std::size_t>(s)]->backward(
          pooled.data(), ph, pw, cc.nl_cache[static_cast<std::size_t>(s)],
          dcur.data(), dpool.data());
      dcur = std::move(dpool);
    }

    const Tensor& last_conv = cc.conv_out[static_cast<std::size_t>(s * cps + cps - 1)];
    Tensor dconv({cout, 2 * ph, 2 * pw});
    maxpool2x2_backward(dcur.data(), cc.pool_argmax[static_cast<std::size_t>(s)].data(),
                        cout, 2 * ph, 2 * pw, dconv.data());
    dcur = std::move(dconv);
    (void)last_conv;

    for (int j = cps - 1; j >= 0; --j) {
      const auto& layer = stages_[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
      const Tensor& out = cc.conv_out[static_cast<std::size_t>(s * cps + j)];
      relu_backward(out.data(), dcur.data(), out.numel());
      const Tensor* input;
      if (j > 0)
        input = &cc.conv_out[static_cast<std::size_t>(s * cps + j - 1)];
      else if (s == 0)
        input = &image;
      else if (nonlocal_[static_cast<std::size_t>(s - 1)])
        input = &cc.nl_out[static_cast<std::size_t>(s - 1)];
      else
        input = &cc.pool_out[static_cast<std::size_t>(s - 1)];
      Tensor din({layer.cin, out.dim(1), out.dim(2)});
      conv3x3_backward(input->data(), layer.w->value.data(), layer.cin, layer.cout,
                       out.dim(1), out.dim(2), dcur.data(), din.data(),
                       layer.w->grad.data(), layer.b->grad.data());
      dcur = std::move(din);
    }
  }
}

}  // namespace cicam
