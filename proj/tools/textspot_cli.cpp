// Copyright 2026 The textspot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// textspot command-line tool. Everything goes through the C API.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "textspot/textspot.h"

namespace {

using json = nlohmann::ordered_json;

const char* const kFullAlphabet = "abcdefghijklmnopqrstuvwxyz0123456789";

// Carries a library status up to main.
struct Failure {
  ts_status status;
};

void Check(ts_status s) {
  if (s != TS_OK) throw Failure{s};
}

struct ConfigDeleter {
  void operator()(ts_config* c) const { ts_config_free(c); }
};
struct DatasetDeleter {
  void operator()(ts_dataset* d) const { ts_dataset_free(d); }
};
struct ModelDeleter {
  void operator()(ts_model* m) const { ts_model_free(m); }
};
using ConfigPtr = std::unique_ptr<ts_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<ts_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<ts_model, ModelDeleter>;

std::string TakeString(char* s) {
  std::string out = s ? s : "";
  ts_string_free(s);
  return out;
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "experiment config (JSON)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", opts.overrides,
                  "override a config field, e.g. world.noise=0.2");
}

void Set(ts_config* cfg, const std::string& key, const std::string& value) {
  Check(ts_config_set(cfg, key.c_str(), value.c_str()));
}

void ApplyAssignments(ts_config* cfg, const std::vector<std::string>& items,
                      const std::string& section) {
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw CLI::ValidationError("--set", "expected key=value, got '" + item + "'");
    }
    std::string key = item.substr(0, eq);
    if (!section.empty()) key = section + "." + key;
    Set(cfg, key, item.substr(eq + 1));
  }
}

ConfigPtr LoadConfig(const CommonOptions& opts) {
  ts_config* raw = nullptr;
  if (opts.config.empty()) {
    Check(ts_config_default(&raw));
  } else {
    Check(ts_config_load(opts.config.c_str(), &raw));
  }
  ConfigPtr cfg(raw);
  ApplyAssignments(cfg.get(), opts.overrides, "");
  return cfg;
}

json ConfigJson(const ts_config* cfg) {
  char* text = nullptr;
  Check(ts_config_to_json(cfg, &text));
  return json::parse(TakeString(text));
}

DatasetPtr LoadDataset(const std::string& path, const std::string& alphabet,
                       std::size_t max_word_len) {
  ts_dataset* raw = nullptr;
  Check(ts_dataset_load(path.c_str(), alphabet.c_str(), max_word_len, &raw));
  return DatasetPtr(raw);
}

// Datasets tied to a model use the configured world alphabet.
DatasetPtr LoadWorldDataset(const std::string& path, const ts_config* cfg) {
  const json c = ConfigJson(cfg);
  return LoadDataset(path, c["world"]["alphabet"].get<std::string>(),
                     c["world"]["max_word_len"].get<std::size_t>());
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{TS_ERR_IO};
  }
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void PrintMatch(const json& doc) {
  for (const auto& scene : doc["scenes"]) {
    std::cout << "scene " << scene["scene_id"].get<std::string>() << " ("
              << scene["mode"].get<std::string>() << ")\n";
    const auto& rows = scene["cost_matrix"];
    std::cout << "cost matrix (" << rows.size() << " gt x "
              << (rows.empty() ? 0 : rows[0].size()) << " preds)\n";
    for (const auto& row : rows) {
      std::cout << " ";
      for (const auto& v : row) std::cout << " " << Fixed(v.get<double>());
      std::cout << "\n";
    }
    const auto& m = scene["match"];
    std::cout << "assignment:";
    for (const auto& a : m["assignment"]) std::cout << " " << a.get<std::size_t>();
    std::cout << "\ntotal: " << Fixed(m["total_cost"].get<double>()) << "\n";
    for (const auto& p : m["pairs"]) {
      std::cout << "  gt " << p["gt"].get<std::size_t>() << " -> pred "
                << p["pred"].get<std::size_t>()
                << "  cls=" << Fixed(p["classification"].get<double>())
                << " box=" << Fixed(p["box"].get<double>())
                << " rec=" << Fixed(p["recognition"].get<double>())
                << " total=" << Fixed(p["total"].get<double>()) << "\n";
    }
  }
}

void PrintLoss(const json& doc) {
  for (const auto& s : doc["scenes"]) {
    std::cout << s["scene_id"].get<std::string>()
              << ": total=" << Fixed(s["total"].get<double>(), 6)
              << " cls=" << Fixed(s["classification"].get<double>(), 6)
              << " l1=" << Fixed(s["box_l1"].get<double>(), 6)
              << " giou=" << Fixed(s["box_giou"].get<double>(), 6)
              << " rec=" << Fixed(s["recognition"].get<double>(), 6) << "\n";
  }
  std::cout << "total=" << Fixed(doc["total"].get<double>(), 6) << "\n";
}

struct ArmSummary {
  std::string experiment;
  std::string arm;
  std::string task;
  std::vector<double> f;
  std::vector<double> p;
  std::vector<double> r;
};

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double StdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

int RunReport(const std::vector<std::string>& inputs, bool csv) {
  std::vector<ArmSummary> arms;
  for (const auto& input : inputs) {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "error: cannot open " << input << "\n";
      return 1;
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json rec;
      try {
        rec = json::parse(line);
        const std::string exp = rec.at("experiment");
        const std::string arm = rec.at("arm");
        ArmSummary* slot = nullptr;
        for (auto& a : arms) {
          if (a.experiment == exp && a.arm == arm) slot = &a;
        }
        if (!slot) {
          arms.push_back({exp, arm, rec.at("task"), {}, {}, {}});
          slot = &arms.back();
        }
        slot->f.push_back(rec.at("f"));
        slot->p.push_back(rec.at("precision"));
        slot->r.push_back(rec.at("recall"));
      } catch (const json::exception& e) {
        std::cerr << "error: " << input << " line " << line_no << ": " << e.what()
                  << "\n";
        return 2;
      }
    }
  }
  if (csv) {
    std::cout << "experiment,arm,task,seeds,precision,recall,f_mean,f_std\n";
    for (const auto& a : arms) {
      std::cout << a.experiment << "," << a.arm << "," << a.task << ","
                << a.f.size() << "," << Fixed(Mean(a.p)) << ","
                << Fixed(Mean(a.r)) << "," << Fixed(Mean(a.f)) << ","
                << Fixed(StdDev(a.f)) << "\n";
    }
    return 0;
  }
  std::printf("%-20s %-18s %-12s %5s %8s %8s %14s\n", "experiment", "arm",
              "task", "seeds", "P", "R", "F (mean+-sd)");
  for (const auto& a : arms) {
    std::printf("%-20s %-18s %-12s %5zu %8.1f %8.1f %7.1f +- %4.1f\n",
                a.experiment.c_str(), a.arm.c_str(), a.task.c_str(), a.f.size(),
                100.0 * Mean(a.p), 100.0 * Mean(a.r), 100.0 * Mean(a.f),
                100.0 * StdDev(a.f));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textspot: text Hungarian loss, toy spotting gym and evaluation"};
  app.set_version_flag("--version", std::string(ts_version()));
  app.require_subcommand(1);

  // gen
  CommonOptions gen_opts;
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "generate domain A/B datasets");
  AddCommon(gen, gen_opts);
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  gen->add_option("--seed", gen_seed, "generation seed");

  // match / loss
  CommonOptions match_opts;
  std::string match_preds, match_gt, match_mode = "full";
  std::vector<std::string> match_weights;
  bool match_json = false;
  auto* match = app.add_subcommand("match", "show the matching of raw predictions");
  AddCommon(match, match_opts);
  match->add_option("--preds", match_preds, "raw predictions (JSONL)")
      ->required();
  match->add_option("--gt", match_gt, "ground-truth scenes (JSONL)")->required();
  match->add_option("--mode", match_mode, "full, weak or detcls")
      ->check(CLI::IsMember({"full", "weak", "detcls"}));
  match->add_option("--weights", match_weights,
                    "cost weight, e.g. alpha_rec=0")
      ->delimiter(',');
  match->add_flag("--json", match_json, "print JSON");

  CommonOptions loss_opts;
  std::string loss_preds, loss_gt, loss_mode = "full";
  std::vector<std::string> loss_weights;
  bool loss_json = false;
  auto* loss = app.add_subcommand("loss", "evaluate the set loss of raw predictions");
  AddCommon(loss, loss_opts);
  loss->add_option("--preds", loss_preds, "raw predictions (JSONL)")->required();
  loss->add_option("--gt", loss_gt, "ground-truth scenes (JSONL)")->required();
  loss->add_option("--mode", loss_mode, "full, weak or detcls")
      ->check(CLI::IsMember({"full", "weak", "detcls"}));
  loss->add_option("--weights", loss_weights,
                   "loss weight, e.g. beta_rec=0.5 or noobj_coef=0.2")
      ->delimiter(',');
  loss->add_flag("--json", loss_json, "print JSON");

  // train
  CommonOptions train_opts;
  std::string train_data, train_out, train_init, train_mode, train_history;
  std::uint64_t init_seed = 1;
  auto* train = app.add_subcommand("train", "train the toy model");
  AddCommon(train, train_opts);
  train->add_option("--data", train_data, "training scenes (JSONL)")->required();
  train->add_option("-o,--out", train_out, "checkpoint to write")->required();
  train->add_option("--mode", train_mode, "full, weak, detcls or detonly")
      ->check(CLI::IsMember({"full", "weak", "detcls", "detonly"}));
  train->add_option("--checkpoint", train_init, "start from this checkpoint")
      ->check(CLI::ExistingFile);
  train->add_option("--init-seed", init_seed, "seed of the initial weights");
  train->add_option("--history", train_history, "write the loss history (JSON)");

  // predict
  CommonOptions pred_opts;
  std::string pred_model, pred_data, pred_out;
  bool pred_raw = false;
  auto* predict = app.add_subcommand("predict", "run a checkpoint on scenes");
  AddCommon(predict, pred_opts);
  predict->add_option("--model", pred_model, "checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--data", pred_data, "scenes (JSONL)")->required();
  predict->add_option("-o,--out", pred_out, "predictions file")->required();
  predict->add_flag("--raw", pred_raw, "write logits of every query");

  // eval
  std::string eval_preds, eval_gt, eval_task = "e2e", eval_lexicon,
                                   eval_alphabet = kFullAlphabet;
  double eval_iou = 0.5;
  std::size_t eval_max_len = 16;
  bool eval_json = false;
  auto* eval = app.add_subcommand("eval", "precision, recall and F of predictions");
  eval->add_option("--preds", eval_preds, "detections or scenes (JSONL)")
      ->required();
  eval->add_option("--gt", eval_gt, "ground-truth scenes (JSONL)")->required();
  eval->add_option("--task", eval_task, "e2e, wordspotting or detection")
      ->check(CLI::IsMember({"e2e", "wordspotting", "detection"}));
  eval->add_option("--iou", eval_iou, "IoU threshold");
  eval->add_option("--lexicon", eval_lexicon, "lexicon, one word per line");
  eval->add_option("--alphabet", eval_alphabet, "ground-truth alphabet");
  eval->add_option("--max-word-len", eval_max_len, "recognition steps");
  eval->add_flag("--json", eval_json, "print JSON");

  // experiment
  CommonOptions exp_opts;
  std::vector<std::string> exp_names;
  std::string exp_out;
  bool exp_no_timing = false;
  auto* experiment = app.add_subcommand("experiment", "run a toy experiment");
  AddCommon(experiment, exp_opts);
  experiment
      ->add_option("--name", exp_names,
                   "weak_vs_synthetic, detection_ablation or matching_ablation")
      ->required()
      ->check(CLI::IsMember(
          {"weak_vs_synthetic", "detection_ablation", "matching_ablation"}));
  experiment->add_option("-o,--out", exp_out, "report file (JSONL)");
  experiment->add_flag("--no-timing", exp_no_timing, "omit wall-clock times");

  // report
  std::vector<std::string> report_in;
  bool report_csv = false;
  auto* report = app.add_subcommand("report", "summarize experiment reports");
  report->add_option("inputs", report_in, "reports (JSONL)")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_flag("--csv", report_csv, "CSV instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      auto cfg = LoadConfig(gen_opts);
      char* manifest = nullptr;
      Check(ts_generate(cfg.get(), gen_out.c_str(), gen_seed, &manifest));
      std::cout << TakeString(manifest) << "\n";
    } else if (*match) {
      auto cfg = LoadConfig(match_opts);
      ApplyAssignments(cfg.get(), match_weights, "cost_weights");
      auto gt = LoadWorldDataset(match_gt, cfg.get());
      char* out = nullptr;
      Check(ts_match(match_preds.c_str(), gt.get(), cfg.get(),
                     match_mode.c_str(), &out));
      const std::string text = TakeString(out);
      if (match_json) {
        std::cout << text << "\n";
      } else {
        PrintMatch(json::parse(text));
      }
    } else if (*loss) {
      auto cfg = LoadConfig(loss_opts);
      ApplyAssignments(cfg.get(), loss_weights, "loss_weights");
      auto gt = LoadWorldDataset(loss_gt, cfg.get());
      char* out = nullptr;
      Check(ts_loss(loss_preds.c_str(), gt.get(), cfg.get(), loss_mode.c_str(),
                    &out));
      const std::string text = TakeString(out);
      if (loss_json) {
        std::cout << text << "\n";
      } else {
        PrintLoss(json::parse(text));
      }
    } else if (*train) {
      auto cfg = LoadConfig(train_opts);
      if (!train_mode.empty()) Set(cfg.get(), "train.mode", "\"" + train_mode + "\"");
      auto data = LoadWorldDataset(train_data, cfg.get());
      ts_model* raw = nullptr;
      if (train_init.empty()) {
        Check(ts_model_init(cfg.get(), init_seed, &raw));
      } else {
        Check(ts_model_load(train_init.c_str(), &raw));
      }
      ModelPtr model(raw);
      char* history = nullptr;
      Check(ts_train(model.get(), data.get(), cfg.get(), &history));
      const std::string text = TakeString(history);
      Check(ts_model_save(model.get(), train_out.c_str()));
      if (!train_history.empty()) WriteText(train_history, text + "\n");
      const json h = json::parse(text);
      const auto& losses = h["loss_history"];
      std::cout << "trained " << losses.size() << " epochs ("
                << h["mode"].get<std::string>() << ")";
      if (!losses.empty()) {
        std::cout << ", final loss " << Fixed(losses.back().get<double>(), 6);
      }
      std::cout << "\ncheckpoint: " << train_out << "\n";
    } else if (*predict) {
      auto cfg = LoadConfig(pred_opts);
      ts_model* raw = nullptr;
      Check(ts_model_load(pred_model.c_str(), &raw));
      ModelPtr model(raw);
      auto data = LoadWorldDataset(pred_data, cfg.get());
      Check(ts_predict(model.get(), data.get(), cfg.get(), pred_out.c_str(),
                       pred_raw ? 1 : 0));
      std::cout << "predictions: " << pred_out << "\n";
    } else if (*eval) {
      auto gt = LoadDataset(eval_gt, eval_alphabet, eval_max_len);
      char* out = nullptr;
      Check(ts_evaluate(eval_preds.c_str(), gt.get(), eval_task.c_str(),
                        eval_iou,
                        eval_lexicon.empty() ? nullptr : eval_lexicon.c_str(),
                        &out));
      const std::string text = TakeString(out);
      if (eval_json) {
        std::cout << text << "\n";
      } else {
        const json r = json::parse(text);
        std::cout << "task=" << r["task"].get<std::string>()
                  << " precision=" << Fixed(r["precision"].get<double>(), 3)
                  << " recall=" << Fixed(r["recall"].get<double>(), 3)
                  << " f=" << Fixed(r["f"].get<double>(), 3) << "\n";
      }
    } else if (*experiment) {
      auto cfg = LoadConfig(exp_opts);
      std::string all;
      for (const auto& name : exp_names) {
        char* out = nullptr;
        Check(ts_run_experiment(cfg.get(), name.c_str(), exp_no_timing ? 0 : 1,
                                &out));
        all += TakeString(out);
      }
      WriteText(exp_out, all);
    } else if (*report) {
      return RunReport(report_in, report_csv);
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << ts_status_name(f.status) << ": "
              << ts_last_error() << "\n";
    return ts_exit_code(f.status);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
