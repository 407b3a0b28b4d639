#include "cicam/evaluator.hpp"

#include <algorithm>
#include <numeric>

#include "cicam/errors.hpp"

namespace cicam {

double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ix = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const long long iy = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const long long inter = ix * iy;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

namespace {

BoundingBox box_or_full_image(const LocalizationMap& h, int image_size,
                              const LocalizerConfig& cfg, bool* fell_back) {
  try {
    return segment_box(h, image_size, cfg);
  } catch (const NoForegroundError&) {
    *fell_back = true;
    return {0, 0, image_size, image_size};
  }
}

}  // namespace

MetricReport evaluate(Network& net, const std::vector<Sample>& dataset,
                      const EvalConfig& config, std::vector<SampleRecord>* records) {
  if (dataset.empty()) throw ValidationError("evaluate: empty dataset");
  const int n = net.config.num_classes;
  const int image_size = net.config.image_size;
  const int topk = std::min(5, n);

  MetricReport rep;
  long long area_sum = 0;
  int id = 0;
  for (const Sample& sample : dataset) {
    if (!sample.gt_box.valid()) throw ValidationError("evaluate: missing gt box");
    Network::Forward f = net.forward(sample.image, /*update_pool_q=*/false);

    const int pred = top_class(f.se);
    std::vector<int> order = rank_maps(f.me, f.se);

    bool fell_back = false;
    LocalizationMap h = combine(f.me, order, config.combiner);
    BoundingBox box = box_or_full_image(h, image_size, config.localizer, &fell_back);
    const double iou_val = iou(box, sample.gt_box);

    const bool cls1 = pred == sample.label;
    const bool cls5 =
        std::find(order.begin(), order.begin() + topk, sample.label) != order.begin() + topk;
    const bool loc_ok = iou_val >= config.iou_threshold;

    bool loc5;
    if (config.top5_per_class_box) {
      // One box per candidate class, segmented from that class's own map.
      loc5 = false;
      for (int k = 0; k < topk && !loc5; ++k) {
        int cls = order[static_cast<std::size_t>(k)];
        if (cls != sample.label) continue;
        LocalizationMap hc;
        hc.h = Tensor({f.me.height(), f.me.width()});
        const std::size_t plane = hc.h.numel();
        std::copy(f.me.t.data() + cls * plane, f.me.t.data() + (cls + 1) * plane,
                  hc.h.data());
        bool fb = false;
        BoundingBox bc = box_or_full_image(hc, image_size, config.localizer, &fb);
        loc5 = iou(bc, sample.gt_box) >= config.iou_threshold;
      }
    } else {
      loc5 = cls5 && loc_ok;
    }

    rep.top1_cls += cls1;
    rep.top5_cls += cls5;
    rep.top1_loc += cls1 && loc_ok;
    rep.top5_loc += loc5;
    rep.gtknown_loc += loc_ok;
    rep.noforeground_count += fell_back;
    area_sum += box.area();

    if (records)
      records->push_back({id, sample.label, pred, iou_val, cls1, cls1 && loc_ok, loc_ok, box});
    ++id;
  }

  rep.counts = static_cast<int>(dataset.size());
  const double inv = 1.0 / rep.counts;
  rep.top1_cls *= inv;
  rep.top5_cls *= inv;
  rep.top1_loc *= inv;
  rep.top5_loc *= inv;
  rep.gtknown_loc *= inv;
  rep.mean_box_area = static_cast<double>(area_sum) * inv;
  return rep;
}

}  // namespace cicam
