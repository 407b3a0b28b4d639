#pragma once

#include <string>
#include <vector>

#include "cicam/box.hpp"
#include "cicam/combiner.hpp"
#include "cicam/datagen.hpp"
#include "cicam/localizer.hpp"
#include "cicam/network.hpp"

namespace cicam {

// Intersection over union on the integer pixel grid, half-open boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

struct MetricReport {
  double top1_cls = 0.0;
  double top5_cls = 0.0;
  double top1_loc = 0.0;
  double top5_loc = 0.0;
  double gtknown_loc = 0.0;
  int counts = 0;             // evaluated samples
  int noforeground_count = 0; // samples that fell back to the full-image box
  double mean_box_area = 0.0; // mean predicted-box area (theta-sweep diagnostics)
};

struct EvalConfig {
  LocalizerConfig localizer;
  CombinerConfig combiner;
  double iou_threshold = 0.5;       // localization-correct predicate
  bool top5_per_class_box = false;  // per-candidate-class boxes for Top-5 loc
};

struct SampleRecord {
  int id;
  int label;
  int pred_class;
  double iou_val;
  bool correct_top1_cls;
  bool correct_top1_loc;
  bool correct_gtknown_loc;
  BoundingBox pred_box;
};

// Final predictions come from branch 2: classification from S^e, the box from
// combining M^e ranked by S^e. The pool is read-only during evaluation.
MetricReport evaluate(Network& net, const std::vector<Sample>& dataset,
                      const EvalConfig& config,
                      std::vector<SampleRecord>* records = nullptr);

}  // namespace cicam
