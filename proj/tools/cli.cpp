#include "axisforge/cli/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "axisforge/axisgeom/auroc.hpp"
#include "axisforge/axisgeom/axis.hpp"
#include "axisforge/axisgeom/diffmean.hpp"
#include "axisforge/error.hpp"
#include "axisforge/parallel.hpp"
#include "axisforge/probekit/correlation.hpp"
#include "axisforge/probekit/delta.hpp"
#include "axisforge/probekit/mlp.hpp"
#include "axisforge/probekit/probe_io.hpp"
#include "axisforge/repstore/axis_file.hpp"
#include "axisforge/repstore/binio.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"
#include "axisforge/simd/kernels.hpp"
#include "axisforge/steerkit/sweep.hpp"
#include "axisforge/toymodel/checkpoint.hpp"
#include "axisforge/toymodel/corpus.hpp"
#include "axisforge/toymodel/train.hpp"

namespace axisforge::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using repstore::HiddenStateDump;

// ---------------------------------------------------------------------------
// Manifest

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw DataError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 15];
  }
  return out;
}

struct Run {
  std::string subcommand;
  json params = json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::optional<std::uint64_t> seed;
  fs::path manifest_path;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(const Run& run) {
  json m;
  m["subcommand"] = run.subcommand;
  m["version"] = AXISFORGE_VERSION;
  m["parameters"] = run.params;
  json inputs = json::array();
  for (const auto& p : run.inputs) {
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_hex(repstore::read_file(p))}});
  }
  m["inputs"] = inputs;
  json outputs = json::array();
  for (const auto& p : run.outputs) outputs.push_back(p.string());
  m["outputs"] = outputs;
  m["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  m["simd"] = std::string(simd::backend_name(simd::active_backend()));
  m["threads"] = max_threads();
  m["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  repstore::atomic_write_file(run.manifest_path, m.dump(2) + "\n");
}

fs::path manifest_beside(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

// ---------------------------------------------------------------------------
// CSV helpers

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double to_double(const std::string& s, std::string_view what, std::size_t line_no) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

std::size_t to_index(const std::string& s, std::string_view what, std::size_t line_no) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad " + std::string(what) + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(repstore::read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared option sets

struct Thresholds {
  double high_min = axisgeom::kDefaultHighMin;
  double low_max = axisgeom::kDefaultLowMax;
};

void add_thresholds(CLI::App* app, Thresholds& t) {
  app->add_option("--high-min", t.high_min, "static score at or above which a sample is high")->capture_default_str();
  app->add_option("--low-max", t.low_max, "static score at or below which a sample is low")->capture_default_str();
}

struct ProbeFlags {
  probekit::ProbeConfig cfg;
  std::string hidden = "512,256,128";
};

void add_probe_flags(CLI::App* app, ProbeFlags& f) {
  app->add_option("--hidden", f.hidden, "hidden layer widths")->capture_default_str();
  app->add_option("--dropout", f.cfg.dropout_rate)->capture_default_str();
  app->add_option("--lr", f.cfg.lr)->capture_default_str();
  app->add_option("--weight-decay", f.cfg.weight_decay)->capture_default_str();
  app->add_option("--epochs", f.cfg.epochs)->capture_default_str();
  app->add_option("--batch", f.cfg.batch_size)->capture_default_str();
  app->add_option("--seed", f.cfg.seed)->capture_default_str();
}

probekit::ProbeConfig resolve_probe(const ProbeFlags& f) {
  probekit::ProbeConfig cfg = f.cfg;
  cfg.hidden_sizes.clear();
  std::stringstream ss(f.hidden);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size() || v == 0) {
      throw UsageError("--hidden expects comma-separated positive widths, got '" + f.hidden + "'");
    }
    cfg.hidden_sizes.push_back(v);
  }
  try {
    cfg.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

json probe_params(const probekit::ProbeConfig& c) {
  return {{"hidden", c.hidden_sizes}, {"dropout", c.dropout_rate}, {"lr", c.lr},
          {"weight_decay", c.weight_decay}, {"beta1", c.beta1}, {"beta2", c.beta2},
          {"eps", c.eps}, {"epochs", c.epochs}, {"batch", c.batch_size}, {"seed", c.seed}};
}

axisgeom::Reduction parse_reduction(const std::string& s) {
  if (s == "mean") return axisgeom::Reduction::kMean;
  if (s == "sv_weighted") return axisgeom::Reduction::kSingularValueWeighted;
  throw UsageError("--reduction must be mean or sv_weighted");
}

void check_layer(std::size_t layer, std::size_t n_layers) {
  if (layer >= n_layers) {
    throw DataError("layer " + std::to_string(layer) + " out of range (dump has " + std::to_string(n_layers) +
                    " layers)");
  }
}

// Positive/negative split for AUROC: by label, or by static-score thresholds.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> auroc_split(const HiddenStateDump& dump,
                                                                          const std::string& by,
                                                                          const Thresholds& t) {
  if (by == "score") {
    auto s = axisgeom::select_classes(dump, t.high_min, t.low_max);
    return {std::move(s.high), std::move(s.low)};
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < dump.n_samples(); ++i) {
    const auto& l = dump.meta()[i].label;
    if (l == repstore::Label::kHigh) pos.push_back(i);
    if (l == repstore::Label::kLow) neg.push_back(i);
  }
  if (pos.empty() || neg.empty()) throw DataError("auroc needs samples labelled both high and low");
  return {std::move(pos), std::move(neg)};
}

std::vector<double> targets_for(const HiddenStateDump& dump, const std::string& targets_csv) {
  if (targets_csv.empty()) return probekit::static_targets(dump);
  const auto lines = read_lines(targets_csv);
  if (lines.empty() || lines[0] != "id,target") throw DataError("targets csv must start with header id,target");
  std::map<std::string, double> by_id;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv(lines[i], i + 1);
    if (f.size() != 2) throw DataError("targets csv line " + std::to_string(i + 1) + ": expected 2 fields");
    const double v = to_double(f[1], "target", i + 1);
    if (!std::isfinite(v)) throw DataError("targets csv line " + std::to_string(i + 1) + ": non-finite target");
    if (!by_id.emplace(f[0], v).second) throw DataError("targets csv: duplicate id '" + f[0] + "'");
  }
  std::vector<double> out;
  for (const auto& m : dump.meta()) {
    const auto it = by_id.find(m.id);
    if (it == by_id.end()) throw DataError("targets csv has no target for sample '" + m.id + "'");
    out.push_back(it->second);
  }
  return out;
}

fs::path probe_path(const fs::path& dir, std::size_t layer) {
  return dir / ("probe_l" + std::to_string(layer) + ".prb");
}

// ---------------------------------------------------------------------------
// Subcommands

HiddenStateDump ingest(const fs::path& csv, repstore::Dtype dtype) {
  const auto lines = read_lines(csv);
  if (lines.empty()) throw DataError("input csv is empty");
  const auto header = split_csv(lines[0], 1);
  const std::vector<std::string> fixed{"id", "word", "static_score", "label", "group", "layer"};
  if (header.size() <= fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw DataError("csv header must be id,word,static_score,label,group,layer,x0,...");
  }
  const std::size_t D = header.size() - fixed.size();
  for (std::size_t j = 0; j < D; ++j) {
    if (header[fixed.size() + j] != "x" + std::to_string(j)) {
      throw DataError("csv header column " + std::to_string(fixed.size() + j) + " should be x" + std::to_string(j));
    }
  }
  std::vector<repstore::SampleMeta> meta;
  std::vector<std::map<std::size_t, std::vector<double>>> rows;
  std::map<std::string, std::size_t> index;
  std::size_t L = 0;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::size_t line_no = ln + 1;
    const auto f = split_csv(lines[ln], line_no);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(f.size()));
    }
    repstore::SampleMeta m;
    m.id = f[0];
    if (m.id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty id");
    m.word = f[1];
    if (!f[2].empty()) m.static_score = to_double(f[2], "static_score", line_no);
    if (!f[3].empty()) {
      m.label = repstore::parse_label(f[3]);
      if (!m.label) throw DataError("line " + std::to_string(line_no) + ": unknown label '" + f[3] + "'");
    }
    if (!f[4].empty()) m.group = f[4];
    const std::size_t layer = to_index(f[5], "layer", line_no);
    if (layer >= 100000) throw DataError("line " + std::to_string(line_no) + ": layer index too large");
    std::vector<double> x(D);
    for (std::size_t j = 0; j < D; ++j) x[j] = to_double(f[6 + j], "value", line_no);

    auto [it, fresh] = index.emplace(m.id, meta.size());
    if (fresh) {
      meta.push_back(m);
      rows.emplace_back();
    } else if (!(meta[it->second] == m)) {
      throw DataError("line " + std::to_string(line_no) + ": metadata for '" + m.id + "' differs from earlier rows");
    }
    if (!rows[it->second].emplace(layer, std::move(x)).second) {
      throw DataError("line " + std::to_string(line_no) + ": duplicate layer " + std::to_string(layer) + " for '" +
                      m.id + "'");
    }
    L = std::max(L, layer + 1);
  }
  if (meta.empty()) throw DataError("input csv has no data rows");
  const std::size_t N = meta.size();
  std::vector<double> states(L * N * D);
  for (std::size_t i = 0; i < N; ++i) {
    if (rows[i].size() != L) {
      throw DataError("sample '" + meta[i].id + "' has " + std::to_string(rows[i].size()) + " of " +
                      std::to_string(L) + " layers");
    }
    for (const auto& [l, x] : rows[i]) std::copy(x.begin(), x.end(), states.begin() + static_cast<std::ptrdiff_t>((l * N + i) * D));
  }
  return HiddenStateDump(L, D, dtype, std::move(meta), std::move(states));
}

std::string format_diffmean(const axisgeom::DiffMeanSet& set) {
  const auto& v = set.vectors;
  std::string out = "layer,layer_norm,n_high,n_low";
  for (std::size_t j = 0; j < v.cols(); ++j) out += ",d" + std::to_string(j);
  out += '\n';
  for (std::size_t l = 0; l < v.rows(); ++l) {
    const double norm = v.rows() > 1 ? static_cast<double>(l) / static_cast<double>(v.rows() - 1) : 0.0;
    out += std::to_string(l) + "," + g17(norm) + "," + std::to_string(set.high_count) + "," +
           std::to_string(set.low_count);
    for (double x : v.row(l)) out += "," + g17(x);
    out += '\n';
  }
  return out;
}

struct Scores {
  std::vector<std::vector<double>> pos, neg;  // per layer
  std::size_t first_layer = 0;
};

// Reads a `project` output (id,label,layer,score); high vs low labels.
Scores read_scores(const fs::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "id,label,layer,score") {
    throw DataError("scores csv must start with header id,label,layer,score");
  }
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_layer;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_csv(lines[i], i + 1);
    if (f.size() != 4) throw DataError("scores csv line " + std::to_string(i + 1) + ": expected 4 fields");
    const std::size_t layer = to_index(f[2], "layer", i + 1);
    const double s = to_double(f[3], "score", i + 1);
    auto& slot = by_layer[layer];
    if (f[1] == "high") slot.first.push_back(s);
    else if (f[1] == "low") slot.second.push_back(s);
  }
  if (by_layer.empty()) throw DataError("scores csv has no rows");
  Scores out;
  out.first_layer = by_layer.begin()->first;
  std::size_t expect = out.first_layer;
  for (auto& [l, pn] : by_layer) {
    if (l != expect++) throw DataError("scores csv layers must be consecutive");
    out.pos.push_back(std::move(pn.first));
    out.neg.push_back(std::move(pn.second));
  }
  return out;
}


struct Options {
  std::optional<std::size_t> threads;
  std::vector<std::string> pos;
  std::string dtype = "f32";
  std::size_t k = 1;
  Thresholds thr;
  std::optional<std::size_t> layer;
  std::string reduction = "mean";
  std::string scores;
  std::string split = "label";
  ProbeFlags probe;
  std::string protocol = "kfold_10";
  std::string targets;
  // toy
  std::size_t steps = toymodel::TrainOptions{}.steps;
  std::size_t toy_batch = toymodel::TrainOptions{}.batch_size;
  double toy_lr = toymodel::TrainOptions{}.lr;
  double toy_wd = toymodel::TrainOptions{}.weight_decay;
  std::size_t corpus_size = 2000;
  std::uint64_t seed = 0;
  std::uint64_t corpus_seed = 1;
  std::size_t n_sequences = 400;
  std::vector<double> alphas{-8, -4, -2, 0, 2, 4, 8};
  std::size_t prompts = 200;
  std::size_t prompt_length = 8;
  std::size_t n_tokens = 4;
  std::string scope = "all_positions";
};

void expect_positionals(const Options& o, std::size_t n, std::string_view shape) {
  if (o.pos.size() != n) {
    throw UsageError("expected " + std::to_string(n) + " positional arguments: " + std::string(shape));
  }
}

int execute(const std::string& name, Options& o, std::ostream& out) {
  Run run;
  run.subcommand = name;
  if (name == "ingest-csv") {
    expect_positionals(o, 2, "IN.csv OUT.hsd");
    if (o.dtype != "f32" && o.dtype != "f64") throw UsageError("--dtype must be f32 or f64");
    run.params = {{"dtype", o.dtype}};
    run.inputs = {o.pos[0]};
    const auto dump = ingest(o.pos[0], o.dtype == "f32" ? repstore::Dtype::kF32 : repstore::Dtype::kF64);
    repstore::write_hsd(dump, o.pos[1]);
    run.outputs = {o.pos[1]};
    out << "wrote " << dump.n_layers() << " x " << dump.n_samples() << " x " << dump.dim() << " dump\n";
  } else if (name == "diffmean") {
    expect_positionals(o, 2, "IN.hsd OUT.csv");
    run.params = {{"high_min", o.thr.high_min}, {"low_max", o.thr.low_max}};
    run.inputs = {o.pos[0]};
    const auto set = axisgeom::diffmean_all(repstore::read_hsd(o.pos[0]), o.thr.high_min, o.thr.low_max);
    repstore::atomic_write_file(o.pos[1], format_diffmean(set));
    run.outputs = {o.pos[1]};
    out << "high " << set.high_count << ", low " << set.low_count << "\n";
  } else if (name == "axis") {
    expect_positionals(o, 2, "IN.hsd OUT.cax");
    run.params = {{"k", o.k}, {"high_min", o.thr.high_min}, {"low_max", o.thr.low_max}};
    run.inputs = {o.pos[0]};
    const auto set = axisgeom::diffmean_all(repstore::read_hsd(o.pos[0]), o.thr.high_min, o.thr.low_max);
    const auto axis = axisgeom::global_axis(set, o.k);
    repstore::write_axis(axisgeom::to_file(axis), o.pos[1]);
    run.outputs = {o.pos[1]};
    out << "k=" << axis.k() << " singular values:";
    for (double s : axis.singular_values) out << ' ' << s;
    out << "\n";
  } else if (name == "project") {
    expect_positionals(o, 3, "IN.hsd AXIS.cax OUT.csv");
    const auto red = parse_reduction(o.reduction);
    run.params = {{"reduction", o.reduction}, {"layer", o.layer ? json(*o.layer) : json("all")}};
    run.inputs = {o.pos[0], o.pos[1]};
    const auto dump = repstore::read_hsd(o.pos[0]);
    const auto axis = axisgeom::from_file(repstore::read_axis(o.pos[1]));
    std::size_t lo = 0, hi = dump.n_layers();
    if (o.layer) {
      check_layer(*o.layer, dump.n_layers());
      lo = *o.layer;
      hi = lo + 1;
    }
    std::string csv = "id,label,layer,score\n";
    for (std::size_t l = lo; l < hi; ++l) {
      const auto s = axisgeom::project_layer(axis, dump, l, {}, red);
      for (std::size_t i = 0; i < dump.n_samples(); ++i) {
        const auto& m = dump.meta()[i];
        csv += csv_field(m.id) + "," + (m.label ? std::string(repstore::label_name(*m.label)) : "") + "," +
               std::to_string(l) + "," + g17(s[i]) + "\n";
      }
    }
    repstore::atomic_write_file(o.pos[2], csv);
    run.outputs = {o.pos[2]};
  } else if (name == "auroc") {
    repstore::LayerCurve curve;
    curve.metric = repstore::Metric::kAuroc;
    if (!o.scores.empty()) {
      expect_positionals(o, 1, "OUT.csv (with --scores SCORES.csv)");
      run.params = {{"source", "scores"}, {"layer", o.layer ? json(*o.layer) : json("all")}};
      run.inputs = {o.scores};
      const auto sc = read_scores(o.scores);
      const std::size_t total = sc.first_layer + sc.pos.size();
      std::size_t lo = 0, hi = sc.pos.size();
      if (o.layer) {
        if (*o.layer < sc.first_layer || *o.layer >= total) {
          throw DataError("layer " + std::to_string(*o.layer) + " is not in the scores file");
        }
        lo = *o.layer - sc.first_layer;
        hi = lo + 1;
      }
      curve.layer_norm.emplace();
      curve.first_layer = sc.first_layer + lo;
      for (std::size_t i = lo; i < hi; ++i) {
        curve.values.push_back(axisgeom::auroc(sc.pos[i], sc.neg[i]));
        const std::size_t l = sc.first_layer + i;
        curve.layer_norm->push_back(total > 1 ? static_cast<double>(l) / static_cast<double>(total - 1) : 0.0);
      }
    } else {
      expect_positionals(o, 3, "IN.hsd AXIS.cax OUT.csv");
      if (o.split != "label" && o.split != "score") throw UsageError("--split must be label or score");
      const auto red = parse_reduction(o.reduction);
      run.params = {{"source", "hsd"}, {"split", o.split}, {"reduction", o.reduction},
                    {"layer", o.layer ? json(*o.layer) : json("all")}};
      if (o.split == "score") {
        run.params["high_min"] = o.thr.high_min;
        run.params["low_max"] = o.thr.low_max;
      }
      run.inputs = {o.pos[0], o.pos[1]};
      const auto dump = repstore::read_hsd(o.pos[0]);
      const auto axis = axisgeom::from_file(repstore::read_axis(o.pos[1]));
      const auto [pos, neg] = auroc_split(dump, o.split, o.thr);
      if (o.layer) {
        check_layer(*o.layer, dump.n_layers());
        const std::size_t L = dump.n_layers();
        curve.values = {axisgeom::auroc_at_layer(axis, dump, *o.layer, pos, neg, red)};
        curve.layer_norm = std::vector<double>{L > 1 ? static_cast<double>(*o.layer) / static_cast<double>(L - 1) : 0.0};
        curve.first_layer = *o.layer;
      } else {
        curve = axisgeom::layer_auroc(axis, dump, pos, neg, red);
      }
    }
    repstore::write_curve_csv(curve, o.pos.back());
    run.outputs = {o.pos.back()};
  } else if (name == "probe-train") {
    expect_positionals(o, 2, "IN.hsd OUT_DIR");
    const auto cfg = resolve_probe(o.probe);
    run.params = probe_params(cfg);
    run.params["targets"] = o.targets.empty() ? "static_score" : o.targets;
    run.seed = cfg.seed;
    run.inputs = {o.pos[0]};
    if (!o.targets.empty()) run.inputs.emplace_back(o.targets);
    const auto dump = repstore::read_hsd(o.pos[0]);
    const auto probes = probekit::train_layer_probes(dump, targets_for(dump, o.targets), cfg);
    const fs::path dir = o.pos[1];
    fs::create_directories(dir);
    for (std::size_t l = 0; l < probes.size(); ++l) {
      probekit::write_probe(probes[l], probe_path(dir, l));
      run.outputs.push_back(probe_path(dir, l));
    }
    run.manifest_path = dir / "manifest.json";
    out << "trained " << probes.size() << " probes\n";
  } else if (name == "probe-eval") {
    expect_positionals(o, 2, "IN.hsd OUT.csv");
    const auto protocol = probekit::parse_protocol(o.protocol);
    if (!protocol) throw UsageError("--protocol must be holdout_80_20 or kfold_10");
    const auto cfg = resolve_probe(o.probe);
    run.params = probe_params(cfg);
    run.params["protocol"] = o.protocol;
    run.params["targets"] = o.targets.empty() ? "static_score" : o.targets;
    run.seed = cfg.seed;
    run.inputs = {o.pos[0]};
    if (!o.targets.empty()) run.inputs.emplace_back(o.targets);
    const auto dump = repstore::read_hsd(o.pos[0]);
    const auto curve = probekit::layer_correlation(dump, targets_for(dump, o.targets), cfg, *protocol);
    repstore::write_curve_csv(curve, o.pos[1]);
    run.outputs = {o.pos[1]};
  } else if (name == "delta") {
    expect_positionals(o, 3, "PROBE_DIR IN.hsd OUT.csv");
    run.params = {{"high_min", o.thr.high_min}, {"low_max", o.thr.low_max}};
    const auto dump = repstore::read_hsd(o.pos[1]);
    std::vector<probekit::ProbeModel> probes;
    for (std::size_t l = 0; l < dump.n_layers(); ++l) {
      const auto p = probe_path(o.pos[0], l);
      if (!fs::exists(p)) throw DataError("missing probe for layer " + std::to_string(l) + ": " + p.string());
      probes.push_back(probekit::read_probe(p));
      run.inputs.push_back(p);
    }
    run.inputs.emplace_back(o.pos[1]);
    const auto split = axisgeom::select_classes(dump, o.thr.high_min, o.thr.low_max);
    const auto rep = probekit::delta_report(probes, dump, split.high, split.low);
    run.params["n_high"] = rep.n_high;
    run.params["n_low"] = rep.n_low;
    const std::vector<repstore::LayerCurve> curves{rep.delta_high, rep.delta_low};
    repstore::write_curves_csv(curves, o.pos[2]);
    run.outputs = {o.pos[2]};
  } else if (name == "toy-train") {
    expect_positionals(o, 1, "OUT.toy");
    toymodel::ToyConfig cfg;
    cfg.seed = o.seed;
    toymodel::TrainOptions t;
    t.steps = o.steps;
    t.batch_size = o.toy_batch;
    t.lr = o.toy_lr;
    t.weight_decay = o.toy_wd;
    run.params = {{"steps", t.steps}, {"batch", t.batch_size}, {"lr", t.lr}, {"weight_decay", t.weight_decay},
                  {"corpus_size", o.corpus_size}, {"corpus_seed", o.corpus_seed}};
    run.seed = o.seed;
    const auto corpus = toymodel::make_corpus(o.corpus_seed, o.corpus_size);
    const auto model = toymodel::train_toy(cfg, corpus, t);
    toymodel::write_toy(model, o.pos[0]);
    run.outputs = {o.pos[0]};
    run.params["loss_first"] = model.loss_trace.front();
    run.params["loss_last"] = model.loss_trace.back();
    out << "loss " << model.loss_trace.front() << " -> " << model.loss_trace.back() << "\n";
  } else if (name == "toy-export") {
    expect_positionals(o, 2, "MODEL.toy OUT.hsd");
    run.params = {{"n_sequences", o.n_sequences}, {"corpus_seed", o.corpus_seed}};
    run.seed = o.corpus_seed;
    run.inputs = {o.pos[0]};
    const auto model = toymodel::read_toy(o.pos[0]);
    const auto dump = toymodel::export_register_dump(model, toymodel::make_corpus(o.corpus_seed, o.n_sequences));
    repstore::write_hsd(dump, o.pos[1]);
    run.outputs = {o.pos[1]};
  } else if (name == "steer-sweep") {
    expect_positionals(o, 3, "MODEL.toy AXIS.cax OUT.csv");
    const auto scope = steerkit::parse_scope(o.scope);
    if (!scope) throw UsageError("--scope must be all_positions or generated_only");
    if (!o.layer) throw UsageError("steer-sweep requires --layer");
    std::vector<double> alphas = o.alphas;
    std::sort(alphas.begin(), alphas.end());
    run.params = {{"layer", *o.layer}, {"alphas", alphas}, {"prompts", o.prompts},
                  {"prompt_length", o.prompt_length}, {"n_tokens", o.n_tokens}, {"scope", o.scope},
                  {"decoding", "greedy"}};
    run.seed = o.seed;
    run.inputs = {o.pos[0], o.pos[1]};
    const auto model = toymodel::read_toy(o.pos[0]);
    const auto axis = axisgeom::from_file(repstore::read_axis(o.pos[1]));
    const auto spec = steerkit::make_steer_spec(axis, *o.layer, 0.0, model.config.n_layers, *scope);
    if (o.prompt_length == 0 || o.prompt_length + o.n_tokens > model.config.context) {
      throw UsageError("--prompt-length plus --tokens must fit the model context");
    }
    const auto prompts = toymodel::make_neutral_prompts(o.seed, o.prompts, o.prompt_length);
    steerkit::SweepOptions so;
    so.n_tokens = o.n_tokens;
    so.scope = *scope;
    so.seed = o.seed;
    const auto res = steerkit::sweep_toy(model, prompts, spec.layer, spec.direction, alphas, so);
    steerkit::write_sweep_csv(res, o.pos[2]);
    run.outputs = {o.pos[2]};
  } else if (name == "report") {
    if (o.pos.size() < 2) throw UsageError("expected OUT.csv followed by one or more curve CSVs");
    std::string csv = "source,layer,layer_norm,metric,value\n";
    for (std::size_t i = 1; i < o.pos.size(); ++i) {
      const fs::path in = o.pos[i];
      run.inputs.push_back(in);
      const auto curves = repstore::read_curves_csv(in);
      // Re-emit each row under its source name.
      std::istringstream body(repstore::format_curves_csv(curves));
      std::string line;
      std::getline(body, line);
      while (std::getline(body, line)) csv += csv_field(in.stem().string()) + "," + line + "\n";
    }
    repstore::atomic_write_file(o.pos[0], csv);
    run.outputs = {o.pos[0]};
  } else {
    throw UsageError("unknown subcommand " + name);
  }
  if (run.manifest_path.empty()) run.manifest_path = manifest_beside(run.outputs.front());
  write_manifest(run);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Concreteness-axis toolkit: build, probe and steer along a concept direction in hidden states",
               "axisforge"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "worker cap (default: AXISFORGE_THREADS, else all cores)");

  auto positional = [&](CLI::App* sub, const std::string& shape) {
    sub->add_option("args", o.pos, shape)->required();
  };
  auto* ingest = app.add_subcommand("ingest-csv", "per-sample metadata + vectors CSV -> HSD1 dump");
  positional(ingest, "IN.csv OUT.hsd");
  ingest->add_option("--dtype", o.dtype, "f32 or f64")->capture_default_str();

  auto* diff = app.add_subcommand("diffmean", "HSD1 -> per-layer DiffMean rows (CSV)");
  positional(diff, "IN.hsd OUT.csv");
  add_thresholds(diff, o.thr);

  auto* axis = app.add_subcommand("axis", "HSD1 -> CAX1 concept axis");
  positional(axis, "IN.hsd OUT.cax");
  axis->add_option("--k", o.k, "number of components")->capture_default_str();
  add_thresholds(axis, o.thr);

  auto* project = app.add_subcommand("project", "HSD1 + CAX1 -> per-sample scores CSV");
  positional(project, "IN.hsd AXIS.cax OUT.csv");
  project->add_option("--layer", o.layer, "single layer (default: all)");
  project->add_option("--reduction", o.reduction, "mean or sv_weighted")->capture_default_str();

  auto* auroc = app.add_subcommand("auroc", "scores or HSD1 + CAX1 -> AUROC curve CSV");
  positional(auroc, "IN.hsd AXIS.cax OUT.csv | OUT.csv with --scores");
  auroc->add_option("--scores", o.scores, "scores CSV from `project`");
  auroc->add_option("--layer", o.layer, "single layer (default: all)");
  auroc->add_option("--split", o.split, "label or score")->capture_default_str();
  auroc->add_option("--reduction", o.reduction, "mean or sv_weighted")->capture_default_str();
  add_thresholds(auroc, o.thr);

  auto* ptrain = app.add_subcommand("probe-train", "HSD1 + targets -> one PRB1 probe per layer");
  positional(ptrain, "IN.hsd OUT_DIR");
  add_probe_flags(ptrain, o.probe);
  ptrain->add_option("--targets", o.targets, "CSV id,target (default: static_score)");

  auto* peval = app.add_subcommand("probe-eval", "HSD1 + targets -> layer-wise Pearson curve CSV");
  positional(peval, "IN.hsd OUT.csv");
  add_probe_flags(peval, o.probe);
  peval->add_option("--targets", o.targets, "CSV id,target (default: static_score)");
  peval->add_option("--protocol", o.protocol, "holdout_80_20 or kfold_10")->capture_default_str();

  auto* delta = app.add_subcommand("delta", "probes + HSD1 -> delta_high / delta_low curves CSV");
  positional(delta, "PROBE_DIR IN.hsd OUT.csv");
  add_thresholds(delta, o.thr);

  auto* ttrain = app.add_subcommand("toy-train", "train the toy transformer on the register corpus");
  positional(ttrain, "OUT.toy");
  ttrain->add_option("--steps", o.steps)->capture_default_str();
  ttrain->add_option("--batch", o.toy_batch)->capture_default_str();
  ttrain->add_option("--lr", o.toy_lr)->capture_default_str();
  ttrain->add_option("--weight-decay", o.toy_wd)->capture_default_str();
  ttrain->add_option("--corpus-size", o.corpus_size)->capture_default_str();
  ttrain->add_option("--corpus-seed", o.corpus_seed)->capture_default_str();
  ttrain->add_option("--seed", o.seed)->capture_default_str();

  auto* texport = app.add_subcommand("toy-export", "TOY1 -> HSD1 of register-corpus states");
  positional(texport, "MODEL.toy OUT.hsd");
  texport->add_option("--n", o.n_sequences, "sequences to export")->capture_default_str();
  texport->add_option("--corpus-seed", o.corpus_seed)->capture_default_str();

  auto* sweep = app.add_subcommand("steer-sweep", "TOY1 + CAX1 -> steering sweep CSV");
  positional(sweep, "MODEL.toy AXIS.cax OUT.csv");
  sweep->add_option("--layer", o.layer, "block whose output is offset");
  sweep->add_option("--alphas", o.alphas, "offsets to sweep")->delimiter(',')->capture_default_str();
  sweep->add_option("--prompts", o.prompts)->capture_default_str();
  sweep->add_option("--prompt-length", o.prompt_length)->capture_default_str();
  sweep->add_option("--tokens", o.n_tokens, "generated tokens per prompt")->capture_default_str();
  sweep->add_option("--scope", o.scope, "all_positions or generated_only")->capture_default_str();
  sweep->add_option("--seed", o.seed)->capture_default_str();

  auto* report = app.add_subcommand("report", "assemble curve CSVs into one summary CSV");
  positional(report, "OUT.csv CURVE.csv...");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return static_cast<int>(ErrorKind::kUsage);
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (o.threads) {
      if (*o.threads == 0) throw UsageError("--threads must be positive");
      set_max_threads(*o.threads);
    }
    return execute(sub->get_name(), o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return static_cast<int>(ErrorKind::kUsage);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
}

}  // namespace axisforge::cli
