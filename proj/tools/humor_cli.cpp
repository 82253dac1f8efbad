// Command-line front end: train, evaluate, grid, predict, report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "humor/backends.hpp"
#include "humor/csv.hpp"
#include "humor/engine.hpp"
#include "humor/error.hpp"
#include "humor/grid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Keys that locate data rather than describe the experiment.
const std::vector<std::string> kDataKeys = {"data-dir", "train", "dev", "test", "extra-train", "backend-dir", "out"};

struct Flags {
  std::map<std::string, std::string> values;
  std::string config_path;
  bool verbose = false;

  void add_experiment(CLI::App* app, bool lists) {
    const char* list_note = lists ? " (comma-separated list)" : "";
    app->add_option("--config", config_path, "flat JSON config; flags override its keys");
    app->add_option("--subtask", values["subtask"], std::string("1 or 2") + list_note);
    app->add_option("--encoder", values["encoder"], std::string("'table' or a backend identity") + list_note);
    app->add_option("--transfer", values["transfer"], std::string("freeze|finetune") + list_note);
    app->add_option("--feature", values["feature"], std::string("context|original|edit") + list_note);
    app->add_option("--extra", values["extra"], std::string("add the extra training split (true|false)") + list_note);
    app->add_option("--lr", values["lr"], "learning rate");
    app->add_option("--schedule", values["schedule"], "constant|linear");
    app->add_option("--epochs", values["epochs"], "maximum epochs");
    app->add_option("--batch-size", values["batch-size"], "batch size");
    app->add_option("--clip", values["clip"], "max global gradient L2 norm");
    app->add_option("--seed", values["seed"], "random seed");
    app->add_option("--selection", values["selection"], "best|last checkpoint");
    app->add_option("--clamp", values["clamp"], "clamp predicted grades to [0,3]");
    app->add_option("--embeddings", values["embeddings"], "embedding text file for the table encoder");
    app->add_option("--embedding-dim", values["embedding-dim"], "embedding width");
    app->add_option("--hidden", values["hidden"], "MLP hidden width");
    app->add_option("--data-dir", values["data-dir"], "dataset root with subtask-1/ and subtask-2/");
    app->add_option("--train", values["train"], "training CSV");
    app->add_option("--dev", values["dev"], "development CSV");
    app->add_option("--test", values["test"], "test CSV");
    app->add_option("--extra-train", values["extra-train"], "extra training CSV");
    app->add_option("--backend-dir", values["backend-dir"], "backend weights directory (default $HUMOR_BACKEND_DIR)");
    app->add_option("--out", values["out"], "output directory");
    app->add_flag("--verbose", verbose, "log every validation");
  }

  // Config file overlaid with every flag that was given.
  json document() const {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw humor::Error("cannot open config " + config_path);
      doc = json::parse(in);
      if (!doc.is_object()) throw humor::Error("config must be a flat JSON object");
    }
    for (const auto& [key, value] : values) {
      if (!value.empty()) doc[key] = value;
    }
    return doc;
  }
};

std::string take_string(json& doc, const std::string& key) {
  if (!doc.contains(key)) return {};
  std::string v = doc[key].is_string() ? doc[key].get<std::string>() : doc[key].dump();
  doc.erase(key);
  return v;
}

struct Locations {
  std::string data_dir, train, dev, test, extra, backend_dir, out;
};

Locations split_locations(json& doc) {
  Locations l;
  l.data_dir = take_string(doc, "data-dir");
  l.train = take_string(doc, "train");
  l.dev = take_string(doc, "dev");
  l.test = take_string(doc, "test");
  l.extra = take_string(doc, "extra-train");
  l.backend_dir = take_string(doc, "backend-dir");
  l.out = take_string(doc, "out");
  return l;
}

fs::path backend_dir(const Locations& l) {
  return l.backend_dir.empty() ? humor::default_backend_dir() : fs::path(l.backend_dir);
}

humor::DataPaths resolve_paths(const Locations& l, int subtask) {
  humor::DataPaths p;
  if (!l.data_dir.empty()) p = humor::DataPaths::released_layout(l.data_dir, subtask);
  if (!l.train.empty()) p.train = l.train;
  if (!l.dev.empty()) p.dev = l.dev;
  if (!l.test.empty()) p.test = l.test;
  if (!l.extra.empty()) p.extra = l.extra;
  if (p.train.empty() || p.dev.empty()) throw humor::Error("training needs --data-dir or both --train and --dev");
  return p;
}

humor::SplitSet load_splits(const humor::DataPaths& p, int subtask, bool use_extra) {
  humor::SplitSet s;
  s.train = humor::load_dataset(p.train, subtask);
  if (use_extra) {
    if (p.extra.empty()) throw humor::Error("--extra requested but no extra training split is configured");
    s.train = humor::merge_extra(std::move(s.train), humor::load_dataset(p.extra, subtask));
  }
  s.dev = humor::load_dataset(p.dev, subtask);
  s.test.subtask = subtask;
  if (!p.test.empty() && fs::exists(p.test)) s.test = humor::load_dataset(p.test, subtask);
  return s;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw humor::Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int run_train(const Flags& flags) {
  json doc = flags.document();
  const Locations loc = split_locations(doc);
  const auto config = humor::ExperimentConfig::from_json(doc);
  const auto paths = resolve_paths(loc, config.subtask);
  const auto splits = load_splits(paths, config.subtask, config.use_extra);
  const auto resources = humor::load_resources(config, {&splits.train, &splits.dev, &splits.test}, backend_dir(loc));

  humor::TrainOptions opts;
  opts.verbose = flags.verbose;
  auto run = humor::train(config, splits.train, splits.dev, resources, opts);
  std::cout << "config " << run.config_hash << "  best " << (config.subtask == 1 ? "dev RMSE " : "dev accuracy ")
            << humor::format_real(run.best_value()) << " at epoch " << run.history[run.best_index].epoch << " step "
            << run.history[run.best_index].step_in_epoch << "\n";
  if (splits.test.size() > 0) {
    humor::FunninessModel model(config, resources);
    model.restore(run.best);
    try {
      run.test = humor::evaluate(model, splits.test);
      std::cout << "test\n" << run.test->render_text();
    } catch (const humor::Error& e) {
      std::cout << "test split not evaluated: " << e.what() << "\n";
    }
    if (!loc.out.empty()) {
      fs::create_directories(loc.out);
      std::ofstream preds(fs::path(loc.out) / "test_predictions.csv");
      humor::write_predictions(model, splits.test, preds);
    }
  }
  if (!loc.out.empty()) {
    fs::create_directories(loc.out);
    run.best.save(fs::path(loc.out) / "checkpoint.ckpt");
    write_json(fs::path(loc.out) / "run.json", run.to_json());
    std::cout << "wrote " << (fs::path(loc.out) / "checkpoint.ckpt").string() << "\n";
  }
  return 0;
}

int run_evaluate(const std::string& checkpoint_path, const std::string& split_path, const std::string& out,
                 const std::string& backend_dir_flag) {
  const auto ckpt = humor::Checkpoint::load(checkpoint_path);
  const auto split = humor::load_dataset(split_path, ckpt.config.subtask);
  const auto resources = humor::load_resources(
      ckpt.config, {&split}, backend_dir_flag.empty() ? humor::default_backend_dir() : fs::path(backend_dir_flag));
  const auto report = humor::evaluate(ckpt, split, resources);
  std::cout << report.render_text();
  if (!out.empty()) write_json(out, report.to_json());
  return 0;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_grid(const Flags& flags) {
  json doc = flags.document();
  const Locations loc = split_locations(doc);
  humor::GridSpec spec;
  auto axis = [&](const std::string& key) {
    auto v = split_list(take_string(doc, key));
    return v;
  };
  if (auto v = axis("subtask"); !v.empty()) {
    spec.subtasks.clear();
    for (const auto& s : v) spec.subtasks.push_back(std::stoi(s));
  }
  if (auto v = axis("encoder"); !v.empty()) spec.encoders = v;
  if (auto v = axis("transfer"); !v.empty()) {
    spec.transfers.clear();
    for (const auto& s : v) spec.transfers.push_back(humor::parse_transfer(s));
  }
  if (auto v = axis("feature"); !v.empty()) {
    spec.features.clear();
    for (const auto& s : v) spec.features.push_back(humor::parse_feature_mode(s));
  }
  if (auto v = axis("extra"); !v.empty()) {
    spec.extras.clear();
    for (const auto& s : v) spec.extras.push_back(humor::parse_bool(s));
  }
  spec.base = humor::ExperimentConfig::from_json(doc);

  const auto bdir = backend_dir(loc);
  std::map<std::pair<int, std::string>, std::shared_ptr<const humor::EmbeddingTable>> tables;
  auto splits = [&](int subtask, bool extra) { return load_splits(resolve_paths(loc, subtask), subtask, extra); };
  auto resources = [&](const humor::ExperimentConfig& c, const humor::SplitSet& s) {
    if (!c.table_encoder()) return humor::load_resources(c, {}, bdir);
    // One table per subtask, filtered to the vocabulary of all its splits.
    const auto key = std::make_pair(c.subtask, c.embeddings);
    if (!tables.contains(key)) {
      const auto p = resolve_paths(loc, c.subtask);
      auto all = load_splits(p, c.subtask, !p.extra.empty() && fs::exists(p.extra));
      tables[key] = humor::load_resources(c, {&all.train, &all.dev, &all.test, &s.train}, bdir).table;
    }
    humor::Resources r;
    r.table = tables[key];
    return r;
  };
  humor::TrainOptions opts;
  opts.verbose = flags.verbose;
  const auto result = humor::run_grid(spec, splits, resources, opts);
  std::cout << result.table;
  if (!loc.out.empty()) {
    fs::create_directories(loc.out);
    json cells = json::array();
    for (const auto& cell : result.cells) {
      json c = {{"config", cell.config.to_json()}, {"label", humor::row_label(cell.config)}};
      if (cell.run) {
        c["run"] = cell.run->to_json();
        cell.run->best.save(fs::path(loc.out) / (cell.config.hash() + ".ckpt"));
      } else {
        c["error"] = cell.error;
      }
      cells.push_back(c);
    }
    write_json(fs::path(loc.out) / "grid.json", cells);
    std::ofstream(fs::path(loc.out) / "grid.txt") << result.table;
  }
  bool any_ok = false;
  for (const auto& cell : result.cells) any_ok |= cell.run.has_value();
  return any_ok ? 0 : 1;
}

int run_predict(const std::string& checkpoint_path, const std::string& input, const std::string& out,
                const std::string& backend_dir_flag) {
  const auto ckpt = humor::Checkpoint::load(checkpoint_path);
  const auto data = humor::load_dataset(input, ckpt.config.subtask);
  const auto resources = humor::load_resources(
      ckpt.config, {&data}, backend_dir_flag.empty() ? humor::default_backend_dir() : fs::path(backend_dir_flag));
  humor::export_predictions(ckpt, input, out, resources);
  std::cout << "wrote " << data.size() << " predictions to " << out << "\n";
  return 0;
}

std::map<std::string, std::string> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw humor::Error("cannot open " + path);
  humor::csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() != 2 || (*header)[0] != "id" || (*header)[1] != "pred") {
    throw humor::Error(path + ": expected header id,pred");
  }
  std::map<std::string, std::string> out;
  std::size_t row = 0;
  while (auto rec = reader.next()) {
    ++row;
    if (rec->size() == 1 && rec->front().empty()) continue;
    if (rec->size() != 2) throw humor::ParseError(row, path + ": expected 2 columns");
    out[(*rec)[0]] = (*rec)[1];
  }
  return out;
}

int run_report(int subtask, const std::string& gold_path, const std::vector<std::string>& preds,
               const std::string& out) {
  const auto gold = humor::load_dataset(gold_path, subtask);
  json j;
  j["subtask"] = subtask;
  j["systems"] = json::object();
  std::vector<std::pair<std::string, std::vector<double>>> systems;
  if (subtask == 1) {
    std::vector<double> truth;
    for (const auto& h : gold.headlines) {
      if (!h.mean_grade) throw humor::Error("gold split has an ungraded headline " + h.id);
      truth.push_back(*h.mean_grade);
    }
    systems.emplace_back("Human", truth);
  }
  for (const auto& spec : preds) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw humor::Error("--pred expects NAME=PATH, got " + spec);
    const auto name = spec.substr(0, eq);
    const auto table = read_predictions(spec.substr(eq + 1));
    humor::MetricsReport report;
    report.subtask = subtask;
    if (subtask == 1) {
      std::vector<double> scores;
      for (const auto& h : gold.headlines) {
        auto it = table.find(h.id);
        if (it == table.end()) throw humor::Error(name + ": no prediction for id " + h.id);
        scores.push_back(std::stod(it->second));
      }
      report.task1 = humor::evaluate_task1(scores, systems.front().second);
      systems.emplace_back(name, scores);
    } else {
      std::vector<int> g, p, g_graded, p_graded;
      std::vector<double> z1, z2;
      for (const auto& pair : gold.pairs) {
        if (!pair.label) continue;
        auto it = table.find(pair.id);
        if (it == table.end()) throw humor::Error(name + ": no prediction for id " + pair.id);
        g.push_back(*pair.label);
        p.push_back(std::stoi(it->second));
        if (pair.scored()) {
          g_graded.push_back(g.back());
          p_graded.push_back(p.back());
          z1.push_back(*pair.first.mean_grade);
          z2.push_back(*pair.second.mean_grade);
        }
      }
      humor::Task2Metrics m;
      m.n_pairs = g.size();
      m.accuracy = humor::accuracy(g, p);
      m.n_evaluated = static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [](int y) { return y != 0; }));
      m.reward = humor::reward(g_graded, p_graded, z1, z2);
      report.task2 = m;
    }
    std::cout << "== " << name << "\n" << report.render_text();
    j["systems"][name] = report.to_json();
  }
  if (systems.size() >= 2) {
    const auto matrix = humor::correlation_matrix(systems);
    std::cout << "\n" << matrix.render();
    j["correlation"] = matrix.to_json();
  }
  if (!out.empty()) write_json(out, j);
  return 0;
}

// Unit sequences a contextual backend must encode for the given inputs, one
// JSON object per line, deduplicated by cache key.
int run_sequences(const std::string& encoder, int subtask, const std::vector<std::string>& inputs,
                  const std::string& out, const std::string& backend_dir_flag) {
  std::unique_ptr<humor::EncoderBackend> backend;
  if (auto opts = humor::TinyContextBackend::parse_identity(encoder)) {
    backend = std::make_unique<humor::TinyContextBackend>(*opts);
  } else {
    const fs::path dir = backend_dir_flag.empty() ? humor::default_backend_dir() : fs::path(backend_dir_flag);
    if (dir.empty()) throw humor::Error("backend '" + encoder + "' needs a weights directory (set HUMOR_BACKEND_DIR)");
    backend = std::make_unique<humor::CachedFeatureBackend>(encoder, dir / encoder, false);
  }
  std::ofstream file(out);
  if (!file) throw humor::Error("cannot write " + out);
  std::set<std::uint64_t> seen;
  for (const auto& path : inputs) {
    for (const auto& h : humor::load_dataset(path, subtask).all_headlines()) {
      const auto in = humor::prepare_contextual(humor::build_triple(h), *backend);
      for (const auto* units : {&in.original, &in.edited, &in.context}) {
        const auto key = humor::sequence_key(*units);
        if (!seen.insert(key).second) continue;
        file << json{{"key", key}, {"units", *units}}.dump() << "\n";
      }
    }
  }
  std::cout << "wrote " << seen.size() << " sequences to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Funniness scoring for micro-edited headlines"};
  app.require_subcommand(1);

  Flags train_flags;
  auto* train = app.add_subcommand("train", "train one configuration, keep the best dev checkpoint");
  train_flags.add_experiment(train, false);

  Flags grid_flags;
  auto* grid = app.add_subcommand("grid", "train and test every cell of an ablation grid");
  grid_flags.add_experiment(grid, true);

  std::string checkpoint, split, input, out, bdir, gold;
  auto* evaluate = app.add_subcommand("evaluate", "score a labeled split with a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  evaluate->add_option("--split", split, "labeled CSV")->required();
  evaluate->add_option("--out", out, "write the report as JSON");
  evaluate->add_option("--backend-dir", bdir, "backend weights directory");

  auto* predict = app.add_subcommand("predict", "write id,pred predictions for a CSV");
  predict->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  predict->add_option("--input", input, "input CSV")->required();
  predict->add_option("--out", out, "output CSV")->required();
  predict->add_option("--backend-dir", bdir, "backend weights directory");

  int subtask = 1;
  std::vector<std::string> preds;
  auto* report = app.add_subcommand("report", "metrics and correlation matrix for prediction files");
  report->add_option("--subtask", subtask, "1 or 2");
  report->add_option("--gold", gold, "gold CSV")->required();
  report->add_option("--pred", preds, "NAME=PATH prediction file (repeatable)")->required();
  report->add_option("--out", out, "write the report as JSON");

  std::string encoder;
  std::vector<std::string> inputs;
  int seq_subtask = 1;
  auto* sequences = app.add_subcommand("sequences", "list the unit sequences a backend must encode");
  sequences->add_option("--encoder", encoder, "backend identity")->required();
  sequences->add_option("--subtask", seq_subtask, "1 or 2");
  sequences->add_option("--input", inputs, "CSV file (repeatable)")->required();
  sequences->add_option("--out", out, "output JSON-lines file")->required();
  sequences->add_option("--backend-dir", bdir, "backend weights directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(train_flags);
    if (*grid) return run_grid(grid_flags);
    if (*evaluate) return run_evaluate(checkpoint, split, out, bdir);
    if (*predict) return run_predict(checkpoint, input, out, bdir);
    if (*report) return run_report(subtask, gold, preds, out);
    if (*sequences) return run_sequences(encoder, seq_subtask, inputs, out, bdir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
