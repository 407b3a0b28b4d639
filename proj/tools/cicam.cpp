// cicam: dataset generation, training, evaluation, sweeps, and visualization
// for the dual-branch CAM localization pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cicam/config_json.hpp"
#include "cicam/errors.hpp"
#include "cicam/evaluator.hpp"
#include "cicam/image_io.hpp"
#include "cicam/run_manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cicam;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::string resolve_data_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("CICAM_DATA_DIR");
  if (env && *env) return env;
  throw ValidationError("no dataset directory: pass --data or set CICAM_DATA_DIR");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

// "start:stop:step" inclusive of stop up to rounding.
std::vector<double> parse_sweep_range(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw ValidationError("sweep range must be start:stop:step");
  double start = std::stod(parts[0]), stop = std::stod(parts[1]), step = std::stod(parts[2]);
  if (step <= 0.0) throw ValidationError("sweep step must be positive");
  std::vector<double> out;
  for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
  return out;
}

json report_to_json(const MetricReport& r) {
  return {{"top1_cls", r.top1_cls},
          {"top5_cls", r.top5_cls},
          {"top1_loc", r.top1_loc},
          {"top5_loc", r.top5_loc},
          {"gtknown_loc", r.gtknown_loc},
          {"counts", r.counts},
          {"noforeground_count", r.noforeground_count},
          {"mean_box_area", r.mean_box_area}};
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// datagen

struct DatagenArgs {
  SceneSpec spec;
  int count = 1000;
  std::string split = "train";
  double rho = -1.0;  // explicit --rho value; <0 means flag absent
  std::string out;
};

int cmd_datagen(const DatagenArgs& a) {
  SceneSpec spec = a.spec;
  Split split = a.split == "test" ? Split::test : Split::train;
  double override_rate = -1.0;
  if (a.rho >= 0.0) {
    if (split == Split::train)
      spec.cooccurrence_rate = a.rho;
    else
      override_rate = a.rho;  // test split defaults to 1/n unless overridden
  }
  if (a.rho > 1.0) throw ValidationError("--rho must be in [0,1]");

  auto samples = generate_dataset(spec, a.count, split, override_rate);
  save_dataset(a.out, samples);

  RunManifest manifest;
  manifest.command = "datagen";
  manifest.config = to_json(spec);
  manifest.config["count"] = a.count;
  manifest.config["split"] = a.split;
  if (a.rho >= 0.0) manifest.config["rho"] = a.rho;
  manifest.seed = spec.seed;
  manifest.deterministic = true;  // directory bytes must not depend on wall clock
  manifest.outputs = {"manifest.json"};
  manifest.dataset_hash = dataset_hash(a.out);
  manifest.write(a.out);

  std::cout << "wrote " << samples.size() << " samples to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  TrainConfig train;
  NetworkConfig net;
  std::string data;
  std::string out = "run";
  std::string config_path;
  std::string resume;
  std::string pool = "on";
  std::string aggregate = "predicted";
  std::string stage_channels;
  std::string nonlocal_stages;
  int checkpoint_every = 1;
  bool epochs_set = false;  // explicit --epochs overrides a resumed config
};

int run_training(const TrainArgs& a, const std::string& data_dir, MetricReport* unused = nullptr) {
  (void)unused;
  auto dataset = load_dataset(data_dir);
  if (dataset.empty()) throw ValidationError("empty training dataset");

  TrainArgs args = a;
  args.net.num_classes = 0;
  for (const Sample& s : dataset) args.net.num_classes = std::max(args.net.num_classes, s.label + 1);
  args.net.image_size = dataset.front().image.dim(1);
  args.net.pool_enabled = a.pool != "off";
  args.net.aggregate =
      a.aggregate == "all-classes" ? Aggregate::all_classes : Aggregate::predicted;

  fs::create_directories(args.out);
  std::ofstream log(args.out + "/train_log.jsonl",
                    a.resume.empty() ? std::ios::trunc : std::ios::app);

  std::unique_ptr<Network> net;
  int start_epoch = 0;
  if (!a.resume.empty()) {
    TrainConfig stored = args.train;
    net = load_network_from_checkpoint(a.resume, &start_epoch, &stored);
    if (a.epochs_set) stored.epochs = a.train.epochs;
    args.train = stored;
    args.net = net->config;
  } else {
    net = std::make_unique<Network>(args.net, args.train.seed);
  }
  Trainer trainer(*net, args.train);
  if (!a.resume.empty()) load_adam_state(a.resume, *net, trainer.optimizer());

  RunManifest manifest;
  manifest.command = "train";
  manifest.config = to_json(args.train);
  manifest.config["network"] = to_json(net->config);
  manifest.seed = args.train.seed;
  manifest.dataset_hash = dataset_hash(data_dir);
  manifest.mark_started();

  for (int epoch = start_epoch + 1; epoch <= args.train.epochs; ++epoch) {
    double mean = trainer.train_epoch(dataset, epoch, [&log](const StepRecord& r) {
      json rec{{"epoch", r.epoch}, {"step", r.step}, {"loss", r.loss}, {"lr", r.lr}};
      log << rec.dump() << "\n";
    });
    log.flush();
    std::cout << "epoch " << epoch << " mean loss " << mean << "\n";
    if (epoch % a.checkpoint_every == 0 || epoch == args.train.epochs) {
      char name[48];
      std::snprintf(name, sizeof(name), "ckpt_epoch_%03d.bin", epoch);
      save_training_checkpoint(args.out + "/" + name, *net, &trainer.optimizer(), epoch,
                               &args.train);
      manifest.outputs.push_back(name);
    }
  }
  save_training_checkpoint(args.out + "/ckpt_final.bin", *net, &trainer.optimizer(),
                           args.train.epochs, &args.train);
  manifest.outputs.push_back("ckpt_final.bin");
  manifest.outputs.push_back("train_log.jsonl");
  manifest.mark_finished();
  manifest.write(args.out);
  return 0;
}

int cmd_train(TrainArgs& a) {
  if (!a.config_path.empty()) {
    std::ifstream f(a.config_path);
    if (!f) throw ValidationError("cannot read config: " + a.config_path);
    json j = json::parse(f);
    a.train = train_config_from_json(j);
    if (j.contains("network")) a.net = network_config_from_json(j.at("network"));
  }
  if (!a.stage_channels.empty()) a.net.backbone.stage_channels = parse_int_list(a.stage_channels);
  if (a.nonlocal_stages == "none")
    a.net.backbone.nonlocal_after_stage.clear();
  else if (!a.nonlocal_stages.empty())
    a.net.backbone.nonlocal_after_stage = parse_int_list(a.nonlocal_stages);
  a.train.validate();
  return run_training(a, resolve_data_dir(a.data));
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data;
  std::string ckpt;
  std::string out = "eval";
  EvalConfig eval;
  std::string gamma = "nlccam-bipolar";
  std::string theta_sweep;
  std::string lambda_list;
  std::string train_data;  // lambda sweep trains one model per lambda
  TrainConfig sweep_train;
  bool write_csv = false;
};

json eval_once(Network& net, const std::vector<Sample>& dataset, const EvalConfig& cfg,
               const std::string& out_dir, bool write_csv) {
  std::vector<SampleRecord> records;
  MetricReport rep = evaluate(net, dataset, cfg, write_csv ? &records : nullptr);
  if (write_csv) {
    std::ofstream csv(out_dir + "/per_sample.csv");
    csv << "id,label,pred_class,iou,correct_top1_cls,correct_top1_loc,correct_gtknown_loc,"
           "x_min,y_min,x_max,y_max\n";
    for (const auto& r : records)
      csv << r.id << ',' << r.label << ',' << r.pred_class << ',' << r.iou_val << ','
          << r.correct_top1_cls << ',' << r.correct_top1_loc << ',' << r.correct_gtknown_loc
          << ',' << r.pred_box.x_min << ',' << r.pred_box.y_min << ',' << r.pred_box.x_max
          << ',' << r.pred_box.y_max << "\n";
  }
  return report_to_json(rep);
}

int cmd_eval(EvalArgs& a) {
  a.eval.combiner.kind = parse_gamma_kind(a.gamma);
  a.eval.localizer.validate();
  const std::string data_dir = resolve_data_dir(a.data);
  auto dataset = load_dataset(data_dir);
  fs::create_directories(a.out);

  RunManifest manifest;
  manifest.command = "eval";
  manifest.config = {{"checkpoint", a.ckpt},
                     {"combiner", to_json(a.eval.combiner)},
                     {"localizer", to_json(a.eval.localizer)},
                     {"iou_threshold", a.eval.iou_threshold}};
  manifest.dataset_hash = dataset_hash(data_dir);
  manifest.mark_started();

  if (!a.lambda_list.empty()) {
    // Update-rate ablation: lambda acts during training, so each entry trains
    // a fresh model with the shared seed and evaluates it.
    if (a.train_data.empty())
      throw ValidationError("--lambda-list requires --train-data");
    auto lambdas = parse_double_list(a.lambda_list);
    json rows = json::array();
    for (double lambda : lambdas) {
      TrainArgs ta;
      ta.train = a.sweep_train;
      ta.train.lambda = lambda;
      ta.out = a.out + "/lambda_" + std::to_string(lambda);
      ta.data = a.train_data;
      run_training(ta, a.train_data);
      auto net = load_network_from_checkpoint(ta.out + "/ckpt_final.bin");
      json row = eval_once(*net, dataset, a.eval, a.out, false);
      row["lambda"] = lambda;
      rows.push_back(row);
      std::cout << "lambda " << lambda << " gtknown_loc " << row["gtknown_loc"] << "\n";
    }
    write_json_file(a.out + "/lambda_sweep.json", rows);
    manifest.outputs.push_back("lambda_sweep.json");
  } else if (!a.theta_sweep.empty()) {
    auto net = load_network_from_checkpoint(a.ckpt);
    auto thetas = parse_sweep_range(a.theta_sweep);
    json rows = json::array();
    for (double theta : thetas) {
      EvalConfig cfg = a.eval;
      cfg.localizer.theta = theta;
      json row = eval_once(*net, dataset, cfg, a.out, false);
      row["theta"] = theta;
      rows.push_back(row);
      std::cout << "theta " << theta << " gtknown_loc " << row["gtknown_loc"]
                << " mean_box_area " << row["mean_box_area"] << "\n";
    }
    write_json_file(a.out + "/theta_sweep.json", rows);
    manifest.outputs.push_back("theta_sweep.json");
  } else {
    auto net = load_network_from_checkpoint(a.ckpt);
    json report = eval_once(*net, dataset, a.eval, a.out, a.write_csv);
    write_json_file(a.out + "/report.json", report);
    manifest.outputs.push_back("report.json");
    if (a.write_csv) manifest.outputs.push_back("per_sample.csv");
    std::cout << report.dump(2) << "\n";
  }

  manifest.mark_finished();
  manifest.write(a.out);
  return 0;
}

// ---------------------------------------------------------------------------
// visualize

struct VisualizeArgs {
  std::string data;
  std::string ckpt;
  std::string out = "viz";
  int count = 8;
  EvalConfig eval;
  std::string gamma = "nlccam-bipolar";
};

void draw_box(ImageU8& img, const BoundingBox& b, std::uint8_t r, std::uint8_t g,
              std::uint8_t bl, int x_off) {
  auto set = [&](int y, int x) {
    if (y < 0 || y >= img.height || x < 0 || x + x_off >= img.width) return;
    img.at(y, x + x_off, 0) = r;
    img.at(y, x + x_off, 1) = g;
    img.at(y, x + x_off, 2) = bl;
  };
  for (int x = b.x_min; x < b.x_max; ++x) {
    set(b.y_min, x);
    set(b.y_max - 1, x);
  }
  for (int y = b.y_min; y < b.y_max; ++y) {
    set(y, b.x_min);
    set(y, b.x_max - 1);
  }
}

int cmd_visualize(VisualizeArgs& a) {
  a.eval.combiner.kind = parse_gamma_kind(a.gamma);
  const std::string data_dir = resolve_data_dir(a.data);
  auto dataset = load_dataset(data_dir);
  auto net = load_network_from_checkpoint(a.ckpt);
  fs::create_directories(a.out);
  const int size = net->config.image_size;
  const int count = std::min<int>(a.count, static_cast<int>(dataset.size()));

  RunManifest manifest;
  manifest.command = "visualize";
  manifest.config = {{"checkpoint", a.ckpt}, {"count", count},
                     {"combiner", to_json(a.eval.combiner)},
                     {"localizer", to_json(a.eval.localizer)}};
  manifest.dataset_hash = dataset_hash(data_dir);
  manifest.deterministic = true;

  for (int i = 0; i < count; ++i) {
    const Sample& s = dataset[static_cast<std::size_t>(i)];
    Network::Forward f = net->forward(s.image, false);
    LocalizationMap h = combine(f.me, rank_maps(f.me, f.se), a.eval.combiner);
    BoundingBox pred;
    try {
      pred = segment_box(h, size, a.eval.localizer);
    } catch (const NoForegroundError&) {
      pred = {0, 0, size, size};
    }

    Tensor up = upsample_bilinear(h.h, size, size);
    double mn = *std::min_element(up.v.begin(), up.v.end());
    double mx = *std::max_element(up.v.begin(), up.v.end());
    double span = mx - mn > 1e-12 ? mx - mn : 1.0;

    // Panels: input | heatmap | input with predicted (green) and gt (red) boxes.
    ImageU8 composite;
    composite.width = 3 * size;
    composite.height = size;
    composite.rgb.assign(static_cast<std::size_t>(3) * composite.width * size, 0);
    ImageU8 input = tensor_to_u8(s.image);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        for (int c = 0; c < 3; ++c) {
          composite.at(y, x, c) = input.at(y, x, c);
          composite.at(y, 2 * size + x, c) = input.at(y, x, c);
        }
        double v = (up.at(y, x) - mn) / span;
        composite.at(y, size + x, 0) = static_cast<std::uint8_t>(std::lround(255 * v));
        composite.at(y, size + x, 1) = static_cast<std::uint8_t>(std::lround(64 * v));
        composite.at(y, size + x, 2) = static_cast<std::uint8_t>(std::lround(255 * (1 - v)));
      }
    draw_box(composite, pred, 0, 255, 0, 2 * size);
    draw_box(composite, s.gt_box, 255, 0, 0, 2 * size);

    char name[32];
    std::snprintf(name, sizeof(name), "sample_%04d.png", i);
    write_png(a.out + "/" + name, composite);
    manifest.outputs.push_back(name);
  }
  manifest.write(a.out);
  std::cout << "wrote " << count << " composites to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CI-CAM desk-scale weakly-supervised localization pipeline"};
  app.require_subcommand(1);

  DatagenArgs dg;
  auto* sub_dg = app.add_subcommand("datagen", "generate a synthetic confounded dataset");
  sub_dg->add_option("--classes", dg.spec.num_classes, "number of classes");
  sub_dg->add_option("--rho", dg.rho, "co-occurrence rate in [0,1]");
  sub_dg->add_option("--count", dg.count, "number of samples");
  sub_dg->add_option("--seed", dg.spec.seed, "generator seed");
  sub_dg->add_option("--size", dg.spec.image_size, "square image size");
  sub_dg->add_option("--fg-scale", dg.spec.foreground_scale, "foreground scale fraction");
  sub_dg->add_option("--split", dg.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  sub_dg->add_option("--out", dg.out, "output directory")->required();

  TrainArgs tr;
  auto* sub_tr = app.add_subcommand("train", "train the dual-branch network");
  sub_tr->add_option("--data", tr.data, "training dataset directory");
  sub_tr->add_option("--out", tr.out, "output directory");
  sub_tr->add_option("--config", tr.config_path, "JSON config file");
  sub_tr->add_option("--resume", tr.resume, "checkpoint to resume from");
  sub_tr->add_option("--lr", tr.train.learning_rate, "learning rate");
  sub_tr->add_option("--batch", tr.train.batch_size, "batch size");
  sub_tr->add_option("--epochs", tr.train.epochs, "epochs");
  sub_tr->add_option("--lambda", tr.train.lambda, "pool update rate");
  sub_tr->add_option("--seed", tr.train.seed, "training seed");
  sub_tr->add_option("--pool", tr.pool, "on or off")->check(CLI::IsMember({"on", "off"}));
  sub_tr->add_option("--aggregate", tr.aggregate, "predicted or all-classes")
      ->check(CLI::IsMember({"predicted", "all-classes"}));
  sub_tr->add_flag("--per-channel-enhance", tr.net.enhance_per_channel,
                   "per-channel 1x1 enhancement");
  sub_tr->add_option("--stage-channels", tr.stage_channels, "e.g. 32,64,128");
  sub_tr->add_option("--convs-per-stage", tr.net.backbone.convs_per_stage);
  sub_tr->add_option("--nonlocal", tr.nonlocal_stages,
                     "1-based stage list, e.g. 1,2; 'none' disables");
  sub_tr->add_option("--embed-ratio", tr.net.backbone.embed_ratio);
  sub_tr->add_option("--checkpoint-every", tr.checkpoint_every, "epochs between checkpoints");

  EvalArgs ev;
  auto* sub_ev = app.add_subcommand("eval", "evaluate a checkpoint");
  sub_ev->add_option("--data", ev.data, "test dataset directory");
  sub_ev->add_option("--ckpt", ev.ckpt, "checkpoint path");
  sub_ev->add_option("--out", ev.out, "output directory");
  sub_ev->add_option("--gamma", ev.gamma, "combination function")
      ->check(CLI::IsMember({"top1", "linear-decay", "nlccam-bipolar"}));
  sub_ev->add_option("--gamma-p", ev.eval.combiner.p);
  sub_ev->add_option("--gamma-q", ev.eval.combiner.q);
  sub_ev->add_option("--gamma-scale", ev.eval.combiner.scale);
  sub_ev->add_option("--theta", ev.eval.localizer.theta, "segmentation threshold");
  sub_ev->add_option("--connectivity", ev.eval.localizer.connectivity)
      ->check(CLI::IsMember({4, 8}));
  sub_ev->add_option("--iou-threshold", ev.eval.iou_threshold);
  sub_ev->add_flag("--top5-per-class-box", ev.eval.top5_per_class_box);
  sub_ev->add_option("--theta-sweep", ev.theta_sweep, "start:stop:step");
  sub_ev->add_option("--lambda-list", ev.lambda_list, "comma list of update rates");
  sub_ev->add_option("--train-data", ev.train_data, "train dataset for --lambda-list");
  sub_ev->add_option("--sweep-epochs", ev.sweep_train.epochs, "epochs per lambda run");
  sub_ev->add_option("--sweep-seed", ev.sweep_train.seed);
  sub_ev->add_flag("--csv", ev.write_csv, "write per-sample CSV");

  VisualizeArgs vz;
  auto* sub_vz = app.add_subcommand("visualize", "write heatmap + box composites");
  sub_vz->add_option("--data", vz.data, "dataset directory");
  sub_vz->add_option("--ckpt", vz.ckpt, "checkpoint path")->required();
  sub_vz->add_option("--out", vz.out, "output directory");
  sub_vz->add_option("--count", vz.count, "number of samples");
  sub_vz->add_option("--theta", vz.eval.localizer.theta);
  sub_vz->add_option("--gamma", vz.gamma)
      ->check(CLI::IsMember({"top1", "linear-decay", "nlccam-bipolar"}));

  try {
    app.parse(argc, argv);
    if (sub_dg->parsed()) return cmd_datagen(dg);
    if (sub_tr->parsed()) {
      tr.epochs_set = sub_tr->count("--epochs") > 0;
      return cmd_train(tr);
    }
    if (sub_ev->parsed()) return cmd_eval(ev);
    if (sub_vz->parsed()) return cmd_visualize(vz);
    return kExitValidation;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
