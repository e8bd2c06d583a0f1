#include "homcsel/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homcsel/cumulants.hpp"
#include "homcsel/detection.hpp"
#include "homcsel/evaluation.hpp"
#include "homcsel/ingest.hpp"
#include "homcsel/selection.hpp"
#include "homcsel/synth.hpp"
#include "homcsel/version.hpp"

namespace homcsel::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Every run leaves a manifest.json next to its outputs: the resolved
// parameters, a hash of each input file, and the library version. Reruns on
// identical inputs are expected to be byte-identical apart from the duration.
struct RunContext {
  std::string command;
  fs::path out;
  json params = json::object();
  json inputs = json::array();
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  RunContext(std::string cmd, const std::string& out_dir)
      : command(std::move(cmd)), out(out_dir) {
    fs::create_directories(out);
  }

  void note_input(const std::string& path) {
    const auto bytes = detail::read_file_bytes(path);
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16)
       << detail::fnv1a64(bytes.data(), bytes.size());
    inputs.push_back({{"path", path}, {"fnv1a64", os.str()}});
  }

  void write_manifest() const {
    json m = {{"command", command},
              {"version", kVersion},
              {"params", params},
              {"inputs", inputs},
              {"duration_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
                   .count()}};
    if (seed) m["seed"] = *seed;
    detail::write_file_text((out / "manifest.json").string(), m.dump(2) + "\n");
  }
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(detail::read_file_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
}

// A value comes from the command line if the flag was seen, else from the
// config file under the flag's long name, else stays at its default.
struct Resolver {
  const CLI::App& sub;
  json cfg;

  template <typename T>
  void pick(const std::string& flag, T& value) const {
    const std::string key = flag.substr(2);
    if (sub.count(flag) == 0 && cfg.contains(key)) {
      try {
        value = cfg.at(key).get<T>();
      } catch (const json::exception& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
      }
    }
  }

  bool given(const std::string& flag) const {
    return sub.count(flag) > 0 || cfg.contains(flag.substr(2));
  }
};

void require(const std::string& value, const char* cmd, const char* flag) {
  if (value.empty())
    throw ValidationError(std::string(cmd) + ": " + flag +
                          " is required (flag or config key)");
}

// "a", "a,b,c" or "a:b" (inclusive range)
std::vector<int> parse_int_list(const std::string& text, const char* what) {
  const auto bad = [&]() {
    return ValidationError(std::string(what) + ": cannot parse '" + text +
                           "' (expected N, N,M,... or A:B)");
  };
  const auto to_int = [&](const std::string& tok) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw bad();
      return v;
    } catch (const std::exception&) {
      throw bad();
    }
  };
  std::vector<int> out;
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const int a = to_int(text.substr(0, colon));
    const int b = to_int(text.substr(colon + 1));
    if (a > b) throw bad();
    for (int v = a; v <= b; ++v) out.push_back(v);
    return out;
  }
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(to_int(tok));
  if (out.empty()) throw bad();
  return out;
}

std::string resolved_header_path(const std::string& raw_path,
                                 const std::string& header_flag) {
  return header_flag.empty() ? detail::default_header_path(raw_path) : header_flag;
}

MaskOptions mask_options(const std::vector<int>& ignore_codes, int w = 0, int h = 0) {
  MaskOptions opt;
  opt.ignore_codes.insert(ignore_codes.begin(), ignore_codes.end());
  opt.expect_width = w;
  opt.expect_height = h;
  return opt;
}

// Rows whose mask pixel is flagged as ignore are excluded from estimation;
// target rows stay in (selection is unsupervised, targets are part of the
// scene).
DataMatrixd drop_ignored_rows(const DataMatrixd& data, const GroundTruthMask& mask) {
  std::vector<Index> keep;
  for (Index j = 0; j < data.t(); ++j)
    if (!mask.ignore[static_cast<std::size_t>(j)]) keep.push_back(j);
  if (keep.size() == static_cast<std::size_t>(data.t())) return data;
  if (keep.size() < 2)
    throw ValidationError("mask leaves " + std::to_string(keep.size()) +
                          " pixels for estimation; need at least 2");
  MatrixX<double> x(static_cast<Index>(keep.size()), data.n());
  for (std::size_t r = 0; r < keep.size(); ++r) x.row(static_cast<Index>(r)) = data.values.row(keep[r]);
  return DataMatrixd(std::move(x), data.band_ids, data.wavelengths);
}

DataMatrixd apply_preset(const DataMatrixd& data, const std::string& preset) {
  if (preset.empty()) return data;
  if (preset != "cuprite")
    throw ValidationError("unknown preset '" + preset + "' (only: cuprite)");
  return subset_bands(data, cuprite_band_preset(data.band_ids));
}

// ---------------------------------------------------------------- select --

struct SelectParams {
  std::string config, cube, header, mask, preset, out = ".";
  std::vector<int> ignore_codes;
  int order = 3;
  int n_left = 1;
  double ridge = 0.0;
  unsigned workers = 0;
  bool no_limit_warning = false;
};

void run_select(const CLI::App& sub, SelectParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--cube", p.cube);
  r.pick("--header", p.header);
  r.pick("--mask", p.mask);
  r.pick("--ignore-code", p.ignore_codes);
  r.pick("--preset", p.preset);
  r.pick("--out", p.out);
  r.pick("--order", p.order);
  r.pick("--n-left", p.n_left);
  r.pick("--ridge", p.ridge);
  r.pick("--workers", p.workers);
  r.pick("--no-limit-warning", p.no_limit_warning);
  require(p.cube, "select", "--cube");

  RunContext ctx("select", p.out);
  const std::string header = resolved_header_path(p.cube, p.header);
  ctx.note_input(p.cube);
  ctx.note_input(header);
  const HsiCube cube = load_cube(p.cube, header);
  DataMatrixd data = unfold_cube(cube);
  data = apply_preset(data, p.preset);
  if (!p.mask.empty()) {
    ctx.note_input(p.mask);
    const GroundTruthMask mask =
        load_mask(p.mask, mask_options(p.ignore_codes, cube.width, cube.height));
    data = drop_ignored_rows(data, mask);
  }

  SelectionConfig config;
  config.order = p.order;
  config.n_left = p.n_left;
  config.ridge = p.ridge;
  config.warn_below_limit = !p.no_limit_warning;
  config.workers = p.workers;

  const SymTensord c2 = cumulant(data, 2, p.workers);
  const SymTensord cd =
      config.order == 2 ? c2 : cumulant(data, config.order, p.workers);
  SelectionResult result;
  try {
    result = select_bands(c2, cd, config, data.band_ids);
  } catch (const DegenerateSelectionError& e) {
    // keep what was selected before every candidate went degenerate
    detail::write_file_text((ctx.out / "selection.partial.json").string(),
                            selection_to_json(e.partial).dump(2) + "\n");
    throw;
  }
  if (result.limit_warning) std::cerr << "warning: " << *result.limit_warning << "\n";

  detail::write_file_text((ctx.out / "selection.json").string(),
                          selection_to_json(result).dump(2) + "\n");
  ctx.params = {{"cube", p.cube},       {"header", header},
                {"mask", p.mask},       {"preset", p.preset},
                {"order", p.order},     {"n_left", p.n_left},
                {"ridge", p.ridge},     {"workers", p.workers},
                {"ignore_codes", p.ignore_codes},
                {"warn_below_limit", !p.no_limit_warning}};
  ctx.write_manifest();
  std::cout << "retained " << result.retained.size() << " of " << data.n()
            << " bands -> " << (ctx.out / "selection.json").string() << "\n";
}

// ---------------------------------------------------------------- detect --

struct DetectParams {
  std::string config, cube, header, bands, spectrum, out = ".";
};

void run_detect(const CLI::App& sub, DetectParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--cube", p.cube);
  r.pick("--header", p.header);
  r.pick("--bands", p.bands);
  r.pick("--spectrum", p.spectrum);
  r.pick("--out", p.out);
  require(p.cube, "detect", "--cube");
  require(p.spectrum, "detect", "--spectrum");

  RunContext ctx("detect", p.out);
  const std::string header = resolved_header_path(p.cube, p.header);
  ctx.note_input(p.cube);
  ctx.note_input(header);
  ctx.note_input(p.spectrum);
  const HsiCube cube = load_cube(p.cube, header);
  DataMatrixd data = unfold_cube(cube);
  if (!p.bands.empty()) {
    ctx.note_input(p.bands);
    const SelectionResult sel =
        selection_from_json(json::parse(detail::read_file_text(p.bands)));
    data = subset_bands(data, sel.retained);
  }
  if (data.wavelengths.empty())
    throw ValidationError(
        "detect: the cube header lists no wavelengths, so the spectrum cannot "
        "be resampled onto its bands");

  const LibrarySpectrum spectrum = load_spectrum(p.spectrum);
  const Signatured sig =
      resample_signature(spectrum, data.wavelengths, data.band_ids);
  const ScoreMap map = detect_map(data, sig, cube.width, cube.height);
  if (!map.degenerate_pixels.empty())
    std::cerr << "warning: " << map.degenerate_pixels.size()
              << " zero-norm pixels scored at angle pi\n";

  write_score_csv(map, (ctx.out / "scores.csv").string());
  write_score_raw(map, (ctx.out / "scores.raw").string());
  ctx.params = {{"cube", p.cube},
                {"header", header},
                {"bands", p.bands},
                {"spectrum", p.spectrum},
                {"signature", sig.name},
                {"band_ids", data.band_ids}};
  ctx.write_manifest();
  std::cout << "scored " << map.angles.size() << " pixels on "
            << data.band_ids.size() << " bands -> "
            << (ctx.out / "scores.csv").string() << "\n";
}

// ------------------------------------------------------------------ eval --

struct EvalParams {
  std::string config, scores, mask, out = ".";
  std::vector<int> ignore_codes;
  double threshold = 0.0;
};

void run_eval(const CLI::App& sub, EvalParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--scores", p.scores);
  r.pick("--mask", p.mask);
  r.pick("--ignore-code", p.ignore_codes);
  r.pick("--out", p.out);
  r.pick("--threshold", p.threshold);
  const bool with_confusion = r.given("--threshold");
  require(p.scores, "eval", "--scores");
  require(p.mask, "eval", "--mask");

  RunContext ctx("eval", p.out);
  ctx.note_input(p.scores);
  ctx.note_input(p.mask);
  const bool csv = fs::path(p.scores).extension() == ".csv";
  const ScoreMap map = csv ? read_score_csv(p.scores) : read_score_raw(p.scores);
  const GroundTruthMask mask =
      load_mask(p.mask, mask_options(p.ignore_codes, map.width, map.height));

  const RocCurve curve = roc(map, mask);
  write_roc_csv(curve, (ctx.out / "roc.csv").string());
  json summary = roc_summary_json(curve);
  if (with_confusion)
    summary["confusion"] = confusion_json(confusion_at(map, mask, p.threshold),
                                          p.threshold);
  detail::write_file_text((ctx.out / "summary.json").string(),
                          summary.dump(2) + "\n");
  ctx.params = {{"scores", p.scores},
                {"mask", p.mask},
                {"ignore_codes", p.ignore_codes}};
  if (with_confusion) ctx.params["threshold"] = p.threshold;
  ctx.write_manifest();
  std::cout << "auc " << format_double(curve.auc) << " over " << curve.n_target
            << " targets / " << curve.n_background << " background -> "
            << (ctx.out / "summary.json").string() << "\n";
}

// ----------------------------------------------------------------- synth --

struct SynthParams {
  std::string config, spec, interleave = "bsq", out = ".";
  std::uint64_t seed = 0;
  int byte_order = 0;
  unsigned workers = 0;
};

void run_synth(const CLI::App& sub, SynthParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--spec", p.spec);
  r.pick("--interleave", p.interleave);
  r.pick("--byte-order", p.byte_order);
  r.pick("--out", p.out);
  r.pick("--workers", p.workers);
  require(p.spec, "synth", "--spec");

  RunContext ctx("synth", p.out);
  ctx.note_input(p.spec);
  SceneSpec spec;
  try {
    spec = scene_spec_from_json(json::parse(detail::read_file_text(p.spec)));
  } catch (const json::parse_error& e) {
    throw ValidationError("scene spec " + p.spec + ": " + e.what());
  }
  if (r.given("--seed")) {
    r.pick("--seed", p.seed);
    spec.seed = p.seed;
  }
  ctx.seed = spec.seed;

  const SynthScene scene = generate(spec, p.workers);
  write_cube(scene.cube, (ctx.out / "cube.raw").string(),
             (ctx.out / "cube.raw.hdr").string(), p.interleave, p.byte_order);
  write_mask_pgm(scene.mask, (ctx.out / "mask.pgm").string());
  LibrarySpectrum sig_spectrum;
  sig_spectrum.wavelengths = scene.cube.wavelengths;
  sig_spectrum.reflectance.assign(scene.signature.values.data(),
                                  scene.signature.values.data() +
                                      scene.signature.values.size());
  sig_spectrum.name = scene.signature.name;
  write_spectrum_csv(sig_spectrum, (ctx.out / "signature.csv").string());
  detail::write_file_text((ctx.out / "scene.json").string(),
                          scene_spec_to_json(spec).dump(2) + "\n");

  ctx.params = {{"spec", p.spec},
                {"interleave", p.interleave},
                {"byte_order", p.byte_order},
                {"resolved_spec", scene_spec_to_json(spec)}};
  ctx.write_manifest();
  std::cout << "scene " << spec.width << "x" << spec.height << "x" << spec.bands
            << " with " << spec.target_count << " targets -> "
            << (ctx.out / "cube.raw").string() << "\n";
}

// ----------------------------------------------------------------- sweep --

struct SweepParams {
  std::string config, cube, header, spectrum, mask, preset, out = ".";
  std::string orders = "2:4", n_left;
  std::vector<int> ignore_codes;
  double ridge = 0.0;
  unsigned workers = 0;
};

struct SweepRow {
  int order;
  int n_left;
  std::string auc, log_target;
  bool limit_flag;
  std::string status;
};

// Detection + ROC for one retained-band set; writes the cell directory and
// returns the AUC.
double sweep_cell(const fs::path& dir, const DataMatrixd& pixels,
                  const std::vector<int>& retained, const LibrarySpectrum& spectrum,
                  const GroundTruthMask& mask, int width, int height) {
  const DataMatrixd sub = subset_bands(pixels, retained);
  const Signatured sig =
      resample_signature(spectrum, sub.wavelengths, sub.band_ids);
  const ScoreMap map = detect_map(sub, sig, width, height);
  const RocCurve curve = roc(map, mask);
  fs::create_directories(dir);
  detail::write_file_text((dir / "bands.json").string(),
                          json{{"retained", retained}}.dump(2) + "\n");
  write_roc_csv(curve, (dir / "roc.csv").string());
  detail::write_file_text((dir / "summary.json").string(),
                          roc_summary_json(curve).dump(2) + "\n");
  return curve.auc;
}

std::vector<int> retained_after(const std::vector<int>& all_ids,
                                const std::vector<RemovalStep>& trace,
                                std::size_t removed) {
  std::set<int> gone;
  for (std::size_t i = 0; i < removed; ++i) gone.insert(trace[i].band_id);
  std::vector<int> out;
  for (int id : all_ids)
    if (!gone.count(id)) out.push_back(id);
  return out;
}

const char* status_of(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const DegenerateError*>(&e)) return "degenerate";
  return "error";
}

void run_sweep(const CLI::App& sub, SweepParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--cube", p.cube);
  r.pick("--header", p.header);
  r.pick("--spectrum", p.spectrum);
  r.pick("--mask", p.mask);
  r.pick("--ignore-code", p.ignore_codes);
  r.pick("--preset", p.preset);
  r.pick("--out", p.out);
  r.pick("--orders", p.orders);
  r.pick("--n-left", p.n_left);
  r.pick("--ridge", p.ridge);
  r.pick("--workers", p.workers);
  require(p.cube, "sweep", "--cube");
  require(p.spectrum, "sweep", "--spectrum");
  require(p.mask, "sweep", "--mask");
  require(p.n_left, "sweep", "--n-left");

  const std::vector<int> orders = parse_int_list(p.orders, "sweep --orders");
  for (int d : orders)
    if (d < 2 || d > kMaxCumulantOrder)
      throw ValidationError("sweep: order " + std::to_string(d) +
                            " is outside [2.." + std::to_string(kMaxCumulantOrder) + "]");
  std::vector<int> n_lefts = parse_int_list(p.n_left, "sweep --n-left");
  std::sort(n_lefts.begin(), n_lefts.end(), std::greater<>());
  n_lefts.erase(std::unique(n_lefts.begin(), n_lefts.end()), n_lefts.end());

  RunContext ctx("sweep", p.out);
  const std::string header = resolved_header_path(p.cube, p.header);
  ctx.note_input(p.cube);
  ctx.note_input(header);
  ctx.note_input(p.spectrum);
  ctx.note_input(p.mask);
  const HsiCube cube = load_cube(p.cube, header);
  const GroundTruthMask mask = load_mask(
      p.mask, mask_options(p.ignore_codes, cube.width, cube.height));
  const LibrarySpectrum spectrum = load_spectrum(p.spectrum);
  DataMatrixd pixels = unfold_cube(cube);
  pixels = apply_preset(pixels, p.preset);
  if (pixels.wavelengths.empty())
    throw ValidationError(
        "sweep: the cube header lists no wavelengths, so the spectrum cannot "
        "be resampled onto its bands");
  const DataMatrixd estimation = drop_ignored_rows(pixels, mask);

  const int n = static_cast<int>(pixels.n());
  for (int k : n_lefts)
    if (k < 1 || k > n)
      throw ValidationError("sweep: n-left " + std::to_string(k) +
                            " is outside [1.." + std::to_string(n) + "]");

  // the covariance is shared by every order's run
  const SymTensord c2 = cumulant(estimation, 2, p.workers);

  std::vector<SweepRow> rows;
  // full-band reference first: no selection, order 0 by convention
  {
    SweepRow row{0, n, "", "", false, "ok"};
    try {
      row.auc = format_double(sweep_cell(ctx.out / "order0_full", pixels,
                                         pixels.band_ids, spectrum, mask,
                                         cube.width, cube.height));
    } catch (const std::exception& e) {
      row.status = status_of(e);
      std::cerr << "baseline: " << e.what() << "\n";
    }
    rows.push_back(row);
  }

  for (const int d : orders) {
    SelectionConfig config;
    config.order = d;
    config.n_left = n_lefts.back();
    config.ridge = p.ridge;
    config.warn_below_limit = false;
    config.workers = p.workers;

    SelectionResult sel;
    try {
      const SymTensord cd = d == 2 ? c2 : cumulant(estimation, d, p.workers);
      sel = select_bands(c2, cd, config, estimation.band_ids);
    } catch (const DegenerateSelectionError& e) {
      sel = e.partial;  // usable prefix; deeper cells become "degenerate" rows
      std::cerr << "order " << d << ": " << e.what() << "\n";
    }

    // one elimination run covers every requested size: the set retained at
    // k bands is the full list minus the first n-k removals
    for (const int k : n_lefts) {
      const std::size_t removed = static_cast<std::size_t>(n - k);
      SweepRow row{d, k, "", "", d >= 3 && k < breaking_point_limit(d), "ok"};
      if (sel.removal_trace.size() < removed) {
        row.status = "degenerate";
        rows.push_back(row);
        continue;
      }
      if (removed > 0)
        row.log_target = format_double(sel.removal_trace[removed - 1].log_target);
      const std::vector<int> retained =
          retained_after(pixels.band_ids, sel.removal_trace, removed);
      const fs::path dir =
          ctx.out / ("order" + std::to_string(d) + "_left" + std::to_string(k));
      try {
        row.auc = format_double(sweep_cell(dir, pixels, retained, spectrum, mask,
                                           cube.width, cube.height));
      } catch (const std::exception& e) {
        row.status = status_of(e);
        std::cerr << "order " << d << ", n-left " << k << ": " << e.what() << "\n";
      }
      rows.push_back(row);
    }
  }

  std::ostringstream csv;
  csv << "order,n_left,auc,log_target,limit_flag,status\n";
  for (const SweepRow& row : rows)
    csv << row.order << "," << row.n_left << "," << row.auc << ","
        << row.log_target << "," << (row.limit_flag ? 1 : 0) << "," << row.status
        << "\n";
  detail::write_file_text((ctx.out / "sweep.csv").string(), csv.str());

  ctx.params = {{"cube", p.cube},     {"header", header},
                {"spectrum", p.spectrum}, {"mask", p.mask},
                {"preset", p.preset}, {"orders", orders},
                {"n_left", n_lefts},  {"ridge", p.ridge},
                {"workers", p.workers}, {"ignore_codes", p.ignore_codes}};
  ctx.write_manifest();
  std::cout << "wrote " << rows.size() << " rows -> "
            << (ctx.out / "sweep.csv").string() << "\n";
}

// ---------------------------------------------------------- diag-offdiag --

struct DiagParams {
  std::string config, orders = "3:6", bands = "2:25", out = ".";
};

void run_diag(const CLI::App& sub, DiagParams& p) {
  const Resolver r{sub, load_config(p.config)};
  r.pick("--orders", p.orders);
  r.pick("--bands", p.bands);
  r.pick("--out", p.out);

  const std::vector<int> orders = parse_int_list(p.orders, "diag-offdiag --orders");
  const std::vector<int> bands = parse_int_list(p.bands, "diag-offdiag --bands");
  for (int d : orders)
    if (d < 3 || d > 6)
      throw ValidationError("diag-offdiag: orders must lie in [3..6]");
  for (int n : bands)
    if (n < 1) throw ValidationError("diag-offdiag: band counts must be >= 1");

  RunContext ctx("diag-offdiag", p.out);
  std::ostringstream csv;
  csv << "order,n,off_diag_ratio,at_least_third,is_limit\n";
  for (const int d : orders) {
    const int limit = breaking_point_limit(d);
    for (const int n : bands) {
      const double ratio = off_diag_ratio(n, d);
      csv << d << "," << n << "," << format_double(ratio) << ","
          << (ratio >= 1.0 / 3.0 ? 1 : 0) << "," << (n == limit ? 1 : 0) << "\n";
    }
    std::cout << "order " << d
              << ": off-diagonal share reaches 1/3 at n = " << limit << "\n";
  }
  detail::write_file_text((ctx.out / "offdiag.csv").string(), csv.str());
  ctx.params = {{"orders", orders}, {"bands", bands}};
  ctx.write_manifest();
}

// ------------------------------------------------------------------ main --

void add_common(CLI::App& sub, std::string& config, std::string& out) {
  sub.add_option("--config", config, "JSON file with default values for the flags");
  sub.add_option("--out", out, "output directory (created if missing)");
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"band selection for hyperspectral target detection via "
               "higher-order cumulant tensors"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto select = std::make_shared<SelectParams>();
  CLI::App* select_cmd = app.add_subcommand(
      "select", "greedily eliminate bands, maximizing the cumulant target");
  add_common(*select_cmd, select->config, select->out);
  select_cmd->add_option("--cube", select->cube, "ENVI raster with the scene");
  select_cmd->add_option("--header", select->header,
                         "ENVI header (default: next to the raster)");
  select_cmd->add_option("--mask", select->mask,
                         "ground truth mask; its ignore pixels are excluded "
                         "from estimation");
  select_cmd->add_option("--ignore-code", select->ignore_codes,
                         "mask codes treated as ignore");
  select_cmd->add_option("--preset", select->preset,
                         "named band preselection (cuprite)");
  select_cmd->add_option("--order", select->order, "cumulant order, 2..5 (2 = MEV)");
  select_cmd->add_option("--n-left", select->n_left, "stop when this many bands remain");
  select_cmd->add_option("--ridge", select->ridge,
                         "diagonal loading added to the covariance");
  select_cmd->add_option("--workers", select->workers, "thread count (0 = all cores)");
  select_cmd->add_flag("--no-limit-warning", select->no_limit_warning,
                       "do not warn when n-left is below the order's reliability limit");
  select_cmd->callback([select, select_cmd] { run_select(*select_cmd, *select); });

  auto detect = std::make_shared<DetectParams>();
  CLI::App* detect_cmd = app.add_subcommand(
      "detect", "score pixels against a signature with the spectral angle mapper");
  add_common(*detect_cmd, detect->config, detect->out);
  detect_cmd->add_option("--cube", detect->cube, "ENVI raster with the scene");
  detect_cmd->add_option("--header", detect->header,
                         "ENVI header (default: next to the raster)");
  detect_cmd->add_option("--bands", detect->bands,
                         "selection JSON restricting the bands (from select)");
  detect_cmd->add_option("--spectrum", detect->spectrum,
                         "target spectrum CSV (wavelength,reflectance)");
  detect_cmd->callback([detect, detect_cmd] { run_detect(*detect_cmd, *detect); });

  auto eval = std::make_shared<EvalParams>();
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "score map + ground truth -> ROC curve and AUC");
  add_common(*eval_cmd, eval->config, eval->out);
  eval_cmd->add_option("--scores", eval->scores,
                       "score map (.csv from detect, anything else is raw)");
  eval_cmd->add_option("--mask", eval->mask, "ground truth mask (PGM or CSV)");
  eval_cmd->add_option("--ignore-code", eval->ignore_codes,
                       "mask codes treated as ignore");
  eval_cmd->add_option("--threshold", eval->threshold,
                       "also report the confusion matrix at this angle");
  eval_cmd->callback([eval, eval_cmd] { run_eval(*eval_cmd, *eval); });

  auto synth = std::make_shared<SynthParams>();
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "generate a synthetic scene with planted targets");
  add_common(*synth_cmd, synth->config, synth->out);
  synth_cmd->add_option("--spec", synth->spec, "scene spec JSON");
  synth_cmd->add_option("--seed", synth->seed, "override the spec's seed");
  synth_cmd->add_option("--interleave", synth->interleave,
                        "cube layout: bsq, bil or bip");
  synth_cmd->add_option("--byte-order", synth->byte_order,
                        "cube byte order: 0 little, 1 big");
  synth_cmd->add_option("--workers", synth->workers, "thread count (0 = all cores)");
  synth_cmd->callback([synth, synth_cmd] { run_synth(*synth_cmd, *synth); });

  auto sweep = std::make_shared<SweepParams>();
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "selection quality grid: AUC per cumulant order and band count");
  add_common(*sweep_cmd, sweep->config, sweep->out);
  sweep_cmd->add_option("--cube", sweep->cube, "ENVI raster with the scene");
  sweep_cmd->add_option("--header", sweep->header,
                        "ENVI header (default: next to the raster)");
  sweep_cmd->add_option("--spectrum", sweep->spectrum,
                        "target spectrum CSV (wavelength,reflectance)");
  sweep_cmd->add_option("--mask", sweep->mask, "ground truth mask (PGM or CSV)");
  sweep_cmd->add_option("--ignore-code", sweep->ignore_codes,
                        "mask codes treated as ignore");
  sweep_cmd->add_option("--preset", sweep->preset,
                        "named band preselection (cuprite)");
  sweep_cmd->add_option("--orders", sweep->orders, "cumulant orders, e.g. 3,4 or 2:5");
  sweep_cmd->add_option("--n-left", sweep->n_left,
                        "band counts to evaluate, e.g. 10 or 5:20");
  sweep_cmd->add_option("--ridge", sweep->ridge,
                        "diagonal loading added to the covariance");
  sweep_cmd->add_option("--workers", sweep->workers, "thread count (0 = all cores)");
  sweep_cmd->callback([sweep, sweep_cmd] { run_sweep(*sweep_cmd, *sweep); });

  auto diag = std::make_shared<DiagParams>();
  CLI::App* diag_cmd = app.add_subcommand(
      "diag-offdiag",
      "tabulate the off-diagonal share of cumulant entries per order and band count");
  add_common(*diag_cmd, diag->config, diag->out);
  diag_cmd->add_option("--orders", diag->orders, "orders to tabulate, e.g. 3:6");
  diag_cmd->add_option("--bands", diag->bands, "band counts to tabulate, e.g. 2:25");
  diag_cmd->callback([diag, diag_cmd] { run_diag(*diag_cmd, *diag); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("homcsel");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace homcsel::cli
