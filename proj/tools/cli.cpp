#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "edoks/errors.hpp"
#include "edoks/eval.hpp"
#include "edoks/image_io.hpp"
#include "edoks/manifest.hpp"
#include "edoks/metric.hpp"
#include "edoks/parallel.hpp"

namespace edoks::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  MetricConfig cfg;
  std::optional<std::size_t> jobs;
  std::string emit_maps;
  bool heat_ramp = false;
  bool raw_maps = false;
  std::string format = "json";
  double step = 0.01;
  std::string output;
  std::string output_dir;
  std::vector<std::string> inputs;
};

std::size_t resolve_jobs(const Options& o) {
  if (o.jobs) return std::max<std::size_t>(*o.jobs, 1);
  if (const char* env = std::getenv("EDOKS_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json config_json(const MetricConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"p", cfg.patch_size},
          {"c", cfg.c},
          {"scales", cfg.scales},
          {"orientations", cfg.orientations}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

// Writes to --output when given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error(path + ": cannot write");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

RgbImage load(const fs::path& path, std::ostream& err) {
  LoadedImage loaded = load_image(path);
  for (const auto& w : loaded.warnings) err << "warning: " << w << '\n';
  return std::move(loaded.image);
}

void write_maps(const ExplanationMaps& maps, const fs::path& dir, bool heat_ramp, bool raw,
                json& listing) {
  fs::create_directories(dir);
  const GrayImage color_view = normalize_by_max(maps.color_diff);
  const std::vector<std::pair<std::string, const GrayImage*>> views{
      {"texture_diff", &maps.texture_diff}, {"color_diff", &color_view}, {"overlay", &maps.overlay}};
  for (const auto& [name, map] : views) {
    const fs::path png = dir / (name + ".png");
    save_png_gray(png, *map);
    listing.push_back(png.string());
    if (heat_ramp) {
      const fs::path heat = dir / (name + "_heat.png");
      save_png(heat, apply_heat_ramp(*map));
      listing.push_back(heat.string());
    }
  }
  if (raw) {
    const std::vector<std::pair<std::string, const GrayImage*>> raws{
        {"texture_diff", &maps.texture_diff}, {"color_diff", &maps.color_diff}, {"overlay", &maps.overlay}};
    for (const auto& [name, map] : raws) {
      const fs::path pfm = dir / (name + ".pfm");
      save_pfm(pfm, *map);
      listing.push_back(pfm.string());
    }
  }
}

int cmd_compare(const Options& o, bool maps_only, std::ostream& out, std::ostream& err) {
  MetricConfig cfg = o.cfg;
  cfg.jobs = resolve_jobs(o);
  const RgbImage a = load(o.inputs.at(0), err);
  const RgbImage b = load(o.inputs.at(1), err);
  if (!a.same_shape(b)) {
    err << "error: image sizes differ (" << a.width << "x" << a.height << " vs " << b.width << "x"
        << b.height << "); images are never resized\n";
    return kSizeMismatch;
  }
  const bool with_maps = !o.emit_maps.empty();
  const MetricReport report = edoks(a, b, cfg, with_maps);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  json j = report_to_json(report, cfg);
  if (with_maps) {
    json listing = json::array();
    write_maps(*report.maps, o.emit_maps, o.heat_ramp, o.raw_maps, listing);
    j["maps"] = listing;
  }
  if (maps_only) {
    out << json{{"maps", j["maps"]}, {"config", config_json(cfg)}}.dump(2) << '\n';
  } else if (o.format == "csv") {
    out << "emd,ok,edok,edoks,alpha,p,c\n"
        << format_double(report.emd_value) << ',' << format_double(report.ok_value) << ','
        << format_double(report.edok_value) << ',' << format_double(report.edoks_value) << ','
        << format_double(report.alpha) << ',' << report.patch_size << ','
        << format_double(report.c) << '\n';
  } else {
    out << j.dump(2) << '\n';
  }
  return kOk;
}

int cmd_batch(const Options& o, std::ostream& out, std::ostream& err) {
  MetricConfig cfg = o.cfg;
  cfg.jobs = 1;
  const std::vector<PairEntry> entries = read_pair_manifest(o.inputs.at(0));

  struct Row {
    std::optional<MetricReport> report;
    std::string error;
    std::vector<std::string> warnings;
  };
  std::vector<Row> rows(entries.size());
  parallel_for(entries.size(), resolve_jobs(o), [&](std::size_t i) {
    Row& row = rows[i];
    const PairEntry& e = entries[i];
    if (!e.error.empty()) {
      row.error = e.error;
      return;
    }
    try {
      LoadedImage a = load_image(e.ref);
      LoadedImage b = load_image(e.dist);
      row.warnings = a.warnings;
      row.warnings.insert(row.warnings.end(), b.warnings.begin(), b.warnings.end());
      row.report = edoks(a.image, b.image, cfg);
      row.warnings.insert(row.warnings.end(), row.report->warnings.begin(), row.report->warnings.end());
    } catch (const std::exception& ex) {
      row.error = ex.what();
    }
  });

  std::size_t failures = 0;
  Sink sink(o.output, out);
  if (o.format == "json") {
    json records = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json r{{"ref_path", entries[i].ref_text}, {"dist_path", entries[i].dist_text}};
      if (rows[i].report) {
        r.update(report_to_json(*rows[i].report, cfg));
      } else {
        r["error"] = rows[i].error;
        ++failures;
      }
      records.push_back(std::move(r));
    }
    *sink << json{{"config", config_json(cfg)}, {"results", records}}.dump(2) << '\n';
  } else {
    *sink << "# config: " << config_json(cfg).dump() << '\n';
    *sink << "ref_path,dist_path,emd,ok,edok,edoks,status\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      *sink << csv_escape(entries[i].ref_text) << ',' << csv_escape(entries[i].dist_text) << ',';
      if (rows[i].report) {
        const MetricReport& r = *rows[i].report;
        *sink << format_double(r.emd_value) << ',' << format_double(r.ok_value) << ','
              << format_double(r.edok_value) << ',' << format_double(r.edoks_value) << ",ok\n";
      } else {
        ++failures;
        *sink << ",,,," << csv_escape("error: " + rows[i].error) << '\n';
      }
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& w : rows[i].warnings) err << "warning: row " << entries[i].line << ": " << w << '\n';
    if (!rows[i].error.empty()) err << "error: row " << entries[i].line << ": " << rows[i].error << '\n';
  }
  return failures == 0 ? kOk : kFailure;
}

std::vector<TermScores> score_pairs(std::size_t count, std::size_t jobs, const MetricConfig& cfg,
                                    const std::function<std::pair<fs::path, fs::path>(std::size_t)>& pair) {
  std::vector<TermScores> terms(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    const auto [ref, dist] = pair(i);
    terms[i] = term_scores(load_image(ref).image, load_image(dist).image, cfg);
  });
  return terms;
}

fs::path output_dir(const Options& o) {
  const fs::path dir = o.output_dir.empty() ? fs::path(".") : fs::path(o.output_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_eval_2afc(const Options& o, std::ostream& out, std::ostream& /*err*/) {
  MetricConfig cfg = o.cfg;
  cfg.jobs = 1;
  const std::vector<TwoAfcEntry> entries = read_2afc_manifest(o.inputs.at(0));
  if (entries.empty()) throw InvalidInput("2AFC manifest has no rows");
  const std::size_t jobs = resolve_jobs(o);
  const auto t0 = score_pairs(entries.size(), jobs, cfg, [&](std::size_t i) {
    return std::pair{entries[i].ref, entries[i].p0};
  });
  const auto t1 = score_pairs(entries.size(), jobs, cfg, [&](std::size_t i) {
    return std::pair{entries[i].ref, entries[i].p1};
  });

  auto accuracy_at = [&](double alpha) {
    std::vector<TripletScores> triplets;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      triplets.push_back({edoks_from_edok(combine_edok(alpha, t0[i].emd, t0[i].ok), cfg.c),
                          edoks_from_edok(combine_edok(alpha, t1[i].emd, t1[i].ok), cfg.c),
                          entries[i].judge});
    }
    return twoafc_accuracy(triplets);
  };

  const fs::path dir = output_dir(o);
  {
    std::ofstream csv(dir / "2afc_scores.csv", std::ios::binary);
    csv << "# config: " << config_json(cfg).dump() << '\n';
    csv << "ref_path,p0_path,p1_path,judge,emd_p0,ok_p0,edoks_p0,emd_p1,ok_p1,edoks_p1,credit\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      const double s0 = edoks_from_edok(combine_edok(cfg.alpha, t0[i].emd, t0[i].ok), cfg.c);
      const double s1 = edoks_from_edok(combine_edok(cfg.alpha, t1[i].emd, t1[i].ok), cfg.c);
      csv << csv_escape(e.ref_text) << ',' << csv_escape(e.p0_text) << ',' << csv_escape(e.p1_text)
          << ',' << format_double(e.judge) << ',' << format_double(t0[i].emd) << ','
          << format_double(t0[i].ok) << ',' << format_double(s0) << ',' << format_double(t1[i].emd)
          << ',' << format_double(t1[i].ok) << ',' << format_double(s1) << ','
          << format_double(twoafc_credit(s0, s1, e.judge)) << '\n';
    }
  }

  json external = json::object();
  for (std::size_t k = 0; !entries.empty() && k < entries.front().external.size(); ++k) {
    std::vector<TripletScores> triplets;
    for (const auto& e : entries) triplets.push_back({e.external[k].p0, e.external[k].p1, e.judge});
    external[entries.front().external[k].name] = twoafc_accuracy(triplets);
  }
  const json summary{{"config", config_json(cfg)},
                     {"samples", entries.size()},
                     {"accuracy", accuracy_at(cfg.alpha)},
                     {"accuracy_emd_only", accuracy_at(1.0)},
                     {"accuracy_ok_only", accuracy_at(0.0)},
                     {"external", external}};
  std::ofstream(dir / "2afc_summary.json", std::ios::binary) << summary.dump(2) << '\n';
  out << summary.dump(2) << '\n';
  return kOk;
}

json jnd_statistics(const std::vector<double>& scores, const std::vector<JndEntry>& entries,
                    const std::vector<double>& mos) {
  json j;
  std::vector<JndScore> js;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    js.push_back({scores[i], entries[i].votes_same, entries[i].judges});
  }
  try {
    const GroupMeans g = jnd_group_means(js);
    j["mean_same"] = g.same;
    j["mean_not_same"] = g.not_same;
    j["ratio"] = g.ratio();
    j["same_count"] = g.same_count;
    j["not_same_count"] = g.not_same_count;
  } catch (const InvalidInput& e) {
    j["group_means_error"] = e.what();
  }
  if (scores.size() >= 3) {
    const Correlations c = correlations(scores, mos);
    j["srocc"] = optional_json(c.srocc);
    j["krocc"] = optional_json(c.krocc);
    j["plcc"] = optional_json(c.plcc);
    if (c.fit) {
      j["logistic_beta"] = c.fit->beta;
      j["logistic_degenerate"] = c.fit->degenerate;
    }
  } else {
    j["correlation_error"] = "need at least 3 samples";
  }
  return j;
}

int cmd_eval_jnd(const Options& o, std::ostream& out, std::ostream& /*err*/) {
  MetricConfig cfg = o.cfg;
  cfg.jobs = 1;
  const std::vector<JndEntry> entries = read_jnd_manifest(o.inputs.at(0));
  if (entries.empty()) throw InvalidInput("JND manifest has no rows");
  const auto terms = score_pairs(entries.size(), resolve_jobs(o), cfg, [&](std::size_t i) {
    return std::pair{entries[i].ref, entries[i].dist};
  });

  std::vector<double> mos;
  for (const auto& e : entries) mos.push_back(mos_record(e.votes_same, e.judges, 0.0).mos);
  auto scores_at = [&](double alpha) {
    std::vector<double> s;
    for (const auto& t : terms) s.push_back(edoks_from_edok(combine_edok(alpha, t.emd, t.ok), cfg.c));
    return s;
  };
  const std::vector<double> main_scores = scores_at(cfg.alpha);

  const fs::path dir = output_dir(o);
  {
    std::ofstream csv(dir / "jnd_scores.csv", std::ios::binary);
    csv << "# config: " << config_json(cfg).dump() << '\n';
    csv << "ref_path,dist_path,votes_same,judges,mos,emd,ok,edok,edoks\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      csv << csv_escape(e.ref_text) << ',' << csv_escape(e.dist_text) << ',' << e.votes_same << ','
          << e.judges << ',' << format_double(mos[i]) << ',' << format_double(terms[i].emd) << ','
          << format_double(terms[i].ok) << ','
          << format_double(combine_edok(cfg.alpha, terms[i].emd, terms[i].ok)) << ','
          << format_double(main_scores[i]) << '\n';
    }
  }

  json external = json::object();
  for (std::size_t k = 0; k < entries.front().external.size(); ++k) {
    std::vector<double> s;
    for (const auto& e : entries) s.push_back(e.external[k].value);
    external[entries.front().external[k].name] = jnd_statistics(s, entries, mos);
  }
  const json summary{{"config", config_json(cfg)},
                     {"samples", entries.size()},
                     {"edoks", jnd_statistics(main_scores, entries, mos)},
                     {"emd_only", jnd_statistics(scores_at(1.0), entries, mos)},
                     {"ok_only", jnd_statistics(scores_at(0.0), entries, mos)},
                     {"external", external}};
  std::ofstream(dir / "jnd_summary.json", std::ios::binary) << summary.dump(2) << '\n';
  out << summary.dump(2) << '\n';
  return kOk;
}

int cmd_alpha_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  MetricConfig cfg = o.cfg;
  cfg.jobs = 1;
  const std::vector<double> grid = alpha_grid(o.step);
  const std::vector<JndEntry> entries = read_jnd_manifest(o.inputs.at(0));
  if (entries.empty()) throw InvalidInput("JND manifest has no rows");
  const auto terms = score_pairs(entries.size(), resolve_jobs(o), cfg, [&](std::size_t i) {
    return std::pair{entries[i].ref, entries[i].dist};
  });
  std::vector<double> mos;
  for (const auto& e : entries) mos.push_back(mos_record(e.votes_same, e.judges, 0.0).mos);
  const std::vector<SweepPoint> curve = alpha_sweep(terms, mos, grid, cfg.c);

  Sink sink(o.output, out);
  *sink << "# config: " << config_json(cfg).dump() << '\n';
  *sink << "alpha,srocc\n";
  std::optional<SweepPoint> best;
  for (const auto& p : curve) {
    *sink << format_double(p.alpha) << ',' << optional_csv(p.srocc) << '\n';
    if (p.srocc && (!best || *p.srocc > *best->srocc)) best = p;
  }
  if (best) err << "best alpha " << best->alpha << " (srocc " << *best->srocc << ")\n";
  return kOk;
}

void add_metric_options(CLI::App* sub, Options& o) {
  sub->add_option("--alpha", o.cfg.alpha, "Texture weight in [0, 1]")->capture_default_str();
  sub->add_option("--patch-size", o.cfg.patch_size, "Patch side p in pixels")->capture_default_str();
  sub->add_option("--c", o.cfg.c, "Constant added before the reciprocal")->capture_default_str();
  sub->add_option("--scales", o.cfg.scales, "Comma-separated filter frequencies (cycles/pixel)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--orientations", o.cfg.orientations, "Comma-separated filter orientations (degrees)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--jobs", o.jobs, "Worker threads (default: EDOKS_JOBS or all cores)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EDOKS perceptual image similarity: texture EMD + Oklab color distance"};
  app.require_subcommand(1, 1);
  Options o;

  auto* compare = app.add_subcommand("compare", "Score one image pair, print the report as JSON");
  compare->add_option("reference", o.inputs, "Reference and distorted image")->required()->expected(2);
  compare->add_option("--emit-maps", o.emit_maps, "Write explanation maps into this directory");
  compare->add_flag("--heat-ramp", o.heat_ramp, "Also write color-ramped maps");
  compare->add_flag("--raw-maps", o.raw_maps, "Also write raw float maps (.pfm)");
  compare->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  add_metric_options(compare, o);

  auto* maps = app.add_subcommand("maps", "Write explanation maps for one image pair");
  maps->add_option("reference", o.inputs, "Reference and distorted image")->required()->expected(2);
  maps->add_option("--emit-maps", o.emit_maps, "Output directory")->required();
  maps->add_flag("--heat-ramp", o.heat_ramp, "Also write color-ramped maps");
  maps->add_flag("--raw-maps", o.raw_maps, "Also write raw float maps (.pfm)");
  add_metric_options(maps, o);

  auto* batch = app.add_subcommand("batch", "Score every pair of a manifest (ref_path,dist_path)");
  batch->add_option("manifest", o.inputs, "Manifest CSV")->required()->expected(1);
  batch->add_option("--output", o.output, "Write results here instead of stdout");
  o.format = "json";
  batch->add_option("--format", o.format, "Output format (default csv)")
      ->check(CLI::IsMember({"json", "csv"}));
  add_metric_options(batch, o);

  auto* eval_2afc = app.add_subcommand("eval-2afc", "2AFC agreement with human judges");
  eval_2afc->add_option("manifest", o.inputs, "2AFC manifest CSV")->required()->expected(1);
  eval_2afc->add_option("--output-dir", o.output_dir, "Directory for per-sample CSV and summary JSON");
  add_metric_options(eval_2afc, o);

  auto* eval_jnd = app.add_subcommand("eval-jnd", "JND group means and SROCC/KROCC/PLCC against MOS");
  eval_jnd->add_option("manifest", o.inputs, "JND manifest CSV")->required()->expected(1);
  eval_jnd->add_option("--output-dir", o.output_dir, "Directory for per-sample CSV and summary JSON");
  add_metric_options(eval_jnd, o);

  auto* sweep = app.add_subcommand("alpha-sweep", "SROCC against MOS as alpha varies");
  sweep->add_option("manifest", o.inputs, "JND manifest CSV")->required()->expected(1);
  sweep->add_option("--step", o.step, "Alpha increment")->capture_default_str();
  sweep->add_option("--output", o.output, "Write the CSV here instead of stdout");
  add_metric_options(sweep, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidConfig;
  }
  if (batch->parsed() && batch->count("--format") == 0) o.format = "csv";

  try {
    o.cfg.validate();
    if (o.jobs && *o.jobs == 0) throw ConfigError("--jobs must be at least 1");
    if (sweep->parsed()) alpha_grid(o.step);
  } catch (const InvalidInput& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  }

  try {
    if (compare->parsed()) return cmd_compare(o, false, out, err);
    if (maps->parsed()) return cmd_compare(o, true, out, err);
    if (batch->parsed()) return cmd_batch(o, out, err);
    if (eval_2afc->parsed()) return cmd_eval_2afc(o, out, err);
    if (eval_jnd->parsed()) return cmd_eval_jnd(o, out, err);
    if (sweep->parsed()) return cmd_alpha_sweep(o, out, err);
  } catch (const DecodeError& e) {
    err << "error: " << e.what() << '\n';
    return kDecodeError;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kSizeMismatch;
  } catch (const ConfigError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kDecodeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace edoks::cli
