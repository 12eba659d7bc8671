// Command-line front end: train / extract / eval / make-synthetic / ablate.
// Exit codes: 0 ok, 2 config error, 3 numerical divergence, 4 I/O error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "lsflow/cli_io.hpp"
#include "lsflow/flow.hpp"
#include "lsflow/rng.hpp"
#include "lsflow/surface.hpp"
#include "lsflow/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsflow;

namespace {

std::vector<std::string> g_argv;

std::string utc_stamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string hex64(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt_time_tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

// <parent>/<name>, or a fresh <parent>/<stamp>-<command>[-k] when name is empty
fs::path make_run_dir(const std::string& parent, const std::string& name,
                      const std::string& command) {
  fs::path dir;
  if (!name.empty()) {
    dir = fs::path(parent) / name;
  } else {
    const std::string base = utc_stamp() + "-" + command;
    dir = fs::path(parent) / base;
    for (int k = 2; fs::exists(dir); ++k) dir = fs::path(parent) / (base + "-" + std::to_string(k));
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory: " + dir.string());
  return dir;
}

void apply_overrides(ConfigMap& cfg, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects section.key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq);
    if (key.find('.') == std::string::npos)
      throw ConfigError("--set key must be section-qualified, got '" + key + "'");
    cfg[key] = s.substr(eq + 1);
  }
}

void write_manifest(const fs::path& run_dir, const std::string& command,
                    const std::string& config_text, std::uint64_t seed,
                    const std::vector<std::string>& inputs,
                    const std::vector<fs::path>& outputs) {
  json m;
  m["command"] = command;
  m["created_utc"] = utc_stamp();
  m["argv"] = g_argv;
  m["seed"] = seed;
  m["config_fnv1a64"] = hex64(fnv1a64(config_text.data(), config_text.size()));
  json in = json::object();
  for (const std::string& p : inputs) in[p] = hex64(fnv1a64_file(p));
  m["inputs"] = in;
  json out = json::object();
  for (const fs::path& p : outputs)
    out[fs::relative(p, run_dir).string()] = hex64(fnv1a64_file(p.string()));
  m["outputs"] = out;
  std::ofstream os(run_dir / "manifest.json");
  if (!os) throw IoError("cannot write manifest in " + run_dir.string());
  os << m.dump(2) << '\n';
}

Vec3 parse_vec3(const std::string& s, const std::string& flag) {
  const std::vector<double> v = parse_double_list(s);
  if (v.size() != 3) throw ConfigError(flag + " expects three comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// mean |1 - ||grad f||| over (at most 2000) mesh vertices, normalized coords
double mesh_eikonal_residual(const ImplicitField& F, const TriMesh& mesh, double t) {
  if (mesh.vertices.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t step = std::max<std::size_t>(1, mesh.vertices.size() / 2000);
  double acc = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < mesh.vertices.size(); i += step) {
    const ImplicitEval e = implicit_eval(F, {mesh.vertices[i], t}, true, false);
    acc += std::abs(e.grad.norm() - 1.0);
    ++n;
  }
  return acc / n;
}

// ---------------------------------------------------------------------------

struct TrainOutcome {
  TrainState state;
  fs::path run_dir;
  MetricsRow last_row;
};

TrainOutcome run_training(const ConfigMap& cfg_map, const fs::path& run_dir,
                          const std::string& resume) {
  RunSpec spec = RunSpec::from_config(cfg_map);
  spec.validate();
  if (spec.p0_path.empty() || spec.p1_path.empty())
    throw ConfigError("config: train needs data.p0 and data.p1");

  const PointCloud P0_raw = load_point_cloud(spec.p0_path);
  const PointCloud P1_raw = load_point_cloud(spec.p1_path);
  CorrespondenceSet C;
  if (!spec.correspondence_path.empty()) {
    C = load_correspondences(spec.correspondence_path);
    C.validate(P0_raw.size(), P1_raw.size());
  }
  NormalizedPair np = normalize_pair(P0_raw, P1_raw);

  if (spec.correspondence_fraction < 1.0 && !C.empty()) {
    Rng sel(derive_seed(spec.train.seed, 101));
    C = select_correspondences(C, spec.correspondence_fraction, sel);
  }
  if (spec.correspondence_noise > 0.0 && !C.empty()) {
    Rng noise(derive_seed(spec.train.seed, 102));
    C = perturb_correspondences(C, np.P1, PerturbMode::GlobalSwap, spec.correspondence_noise, 1,
                                noise);
  }

  fs::create_directories(run_dir / "checkpoints");
  const std::string config_text = canonical_config_text(cfg_map);
  {
    std::ofstream os(run_dir / "config.cfg");
    os << config_text;
  }

  TrainOutcome out{resume.empty() ? init_train_state(spec.train, np.transform)
                                  : load_checkpoint(resume),
                   run_dir, MetricsRow{}};
  TrainState& st = out.state;

  std::ofstream metrics(run_dir / "metrics.csv");
  if (!metrics) throw IoError("cannot write metrics.csv in " + run_dir.string());
  metrics << metrics_csv_header() << '\n';

  const int total = st.cfg.epochs;
  const int report = std::max(1, total / 10);
  const auto t0 = std::chrono::steady_clock::now();
  train(st, np.P0, np.P1, C, -1, nullptr, [&](const MetricsRow& row) {
    metrics << metrics_csv_row(row) << '\n';
    out.last_row = row;
    if (st.epoch % st.cfg.checkpoint_interval == 0 && st.epoch < total) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt_%06d.bin", st.epoch);
      save_checkpoint((run_dir / "checkpoints" / name).string(), st);
    }
    if ((row.epoch + 1) % report == 0 || row.epoch + 1 == total)
      std::fprintf(stderr, "epoch %d/%d  total %.6g\n", row.epoch + 1, total, row.loss.total);
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  metrics.flush();

  save_checkpoint((run_dir / "checkpoints" / "final.bin").string(), st);
  {
    std::ofstream os(run_dir / "timing.txt");
    os << "train_wall_seconds = " << fmt_g(wall) << "\n";
  }

  std::vector<std::string> inputs = {spec.p0_path, spec.p1_path};
  if (!spec.correspondence_path.empty()) inputs.push_back(spec.correspondence_path);
  write_manifest(run_dir, "train", config_text, spec.train.seed, inputs,
                 {run_dir / "config.cfg", run_dir / "metrics.csv",
                  run_dir / "checkpoints" / "final.bin"});
  return out;
}

// extract meshes at the given times; returns (time, normalized mesh, file path)
struct Extracted {
  double t;
  TriMesh normalized;
  fs::path path;
};

std::vector<Extracted> extract_meshes(const TrainState& st, const std::vector<double>& times,
                                      int resolution, const fs::path& run_dir) {
  for (const double t : times)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("extraction times must lie in [0,1]");
  fs::create_directories(run_dir / "meshes");
  std::vector<Extracted> out;
  for (const double t : times) {
    TriMesh mesh = extract_mesh(st.F, t, resolution);
    TriMesh raw = mesh;
    for (Vec3& v : raw.vertices) v = st.transform.invert(v);
    const fs::path p = run_dir / "meshes" / ("mesh_t" + fmt_time_tag(t) + ".obj");
    save_mesh_obj(p.string(), raw);
    out.push_back({t, std::move(mesh), p});
  }
  return out;
}

void write_trajectories(const TrainState& st, int count, int resolution,
                        const fs::path& run_dir) {
  if (count <= 0) return;
  const TriMesh m0 = extract_mesh(st.F, 0.0, resolution);
  if (m0.empty()) throw ConfigError("trajectories: empty surface at t = 0");
  const PointCloud seeds = sample_mesh_surface(m0, count, derive_seed(st.cfg.seed, 103));
  std::vector<Trajectory> trajs;
  trajs.reserve(seeds.size());
  for (const Vec3& x0 : seeds.points) {
    Trajectory tr = integrate_trajectory(st.Vf, x0, st.cfg.T);
    for (Vec3& p : tr.points) p = st.transform.invert(p);
    trajs.push_back(std::move(tr));
  }
  fs::create_directories(run_dir / "trajectories");
  std::ofstream os(run_dir / "trajectories" / "trajectories.csv");
  if (!os) throw IoError("cannot write trajectories.csv");
  write_trajectories_csv(os, trajs);
}

// ---------------------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& run_dir_name, const std::string& resume) {
  ConfigMap cfg = load_config(config_path);
  apply_overrides(cfg, sets);
  const RunSpec spec = RunSpec::from_config(cfg);  // fail fast before mkdir
  spec.validate();
  const fs::path run_dir = make_run_dir(spec.output, run_dir_name, "train");
  run_training(cfg, run_dir, resume);
  std::cout << run_dir.string() << '\n';
  return 0;
}

int cmd_extract(const std::string& ckpt, const std::string& times_str, int resolution,
                const std::string& out, const std::string& run_dir_name, int trajectories) {
  const std::vector<double> times = parse_double_list(times_str);
  TrainState st = load_checkpoint(ckpt);
  const fs::path run_dir = make_run_dir(out, run_dir_name, "extract");
  const std::vector<Extracted> meshes = extract_meshes(st, times, resolution, run_dir);
  write_trajectories(st, trajectories, resolution, run_dir);

  std::vector<fs::path> outputs;
  for (const Extracted& e : meshes) outputs.push_back(e.path);
  if (trajectories > 0) outputs.push_back(run_dir / "trajectories" / "trajectories.csv");
  std::ostringstream cfg_text;
  cfg_text << "checkpoint = " << ckpt << "\ntimes = " << times_str
           << "\nresolution = " << resolution << "\n";
  write_manifest(run_dir, "extract", cfg_text.str(), st.cfg.seed, {ckpt}, outputs);
  std::cout << run_dir.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& mesh_path, const std::string& gt_path, int samples,
             std::uint64_t seed, const std::string& out, const std::string& run_dir_name) {
  if (samples < 1) throw ConfigError("eval: samples must be >= 1");
  const TriMesh A = load_mesh_obj(mesh_path);
  const TriMesh B = load_mesh_obj(gt_path);
  const PointCloud a = sample_mesh_surface(A, samples, derive_seed(seed, 0));
  const PointCloud b = sample_mesh_surface(B, samples, derive_seed(seed, 1));
  const MetricReport rep = compare_point_sets(a.points, b.points);

  std::ostringstream csv;
  csv << "cd,hd,cd_scaled,hd_scaled\n"
      << fmt_g(rep.cd) << ',' << fmt_g(rep.hd) << ',' << fmt_g(rep.cd_scaled()) << ','
      << fmt_g(rep.hd_scaled()) << '\n';
  std::cout << csv.str();
  if (!out.empty()) {
    const fs::path run_dir = make_run_dir(out, run_dir_name, "eval");
    std::ofstream os(run_dir / "metrics.csv");
    if (!os) throw IoError("cannot write metrics.csv in " + run_dir.string());
    os << csv.str();
    os.close();
    std::ostringstream cfg_text;
    cfg_text << "mesh = " << mesh_path << "\ngt = " << gt_path << "\nsamples = " << samples
             << "\n";
    write_manifest(run_dir, "eval", cfg_text.str(), seed, {mesh_path, gt_path},
                   {run_dir / "metrics.csv"});
  }
  return 0;
}

int cmd_make_synthetic(const std::string& kind, const SynthParams& params, std::uint64_t seed,
                       const std::string& out, const std::string& run_dir_name) {
  const SyntheticData data = make_synthetic(kind, params, seed);
  const fs::path run_dir = make_run_dir(out, run_dir_name, kind);

  save_point_cloud_xyz((run_dir / "p0.xyz").string(), data.P0);
  save_point_cloud_xyz((run_dir / "p1.xyz").string(), data.P1);
  save_correspondences((run_dir / "correspondences.txt").string(), data.C);
  std::vector<fs::path> outputs = {run_dir / "p0.xyz", run_dir / "p1.xyz",
                                   run_dir / "correspondences.txt"};
  if (!data.gt_meshes.empty()) fs::create_directories(run_dir / "gt");
  for (std::size_t i = 0; i < data.gt_meshes.size(); ++i) {
    const fs::path p = run_dir / "gt" / ("gt_t" + fmt_time_tag(data.gt_times[i]) + ".obj");
    save_mesh_obj(p.string(), data.gt_meshes[i]);
    outputs.push_back(p);
  }

  // effective generator parameters, reproducible from the manifest alone
  ConfigMap eff;
  eff["synth.kind"] = kind;
  eff["synth.seed"] = std::to_string(seed);
  eff["synth.n"] = std::to_string(params.n);
  eff["synth.radius"] = fmt_g(params.radius);
  eff["synth.offset"] = fmt_g(params.offset.x()) + "," + fmt_g(params.offset.y()) + "," +
                        fmt_g(params.offset.z());
  eff["synth.angle_deg"] = fmt_g(params.angle_deg);
  eff["synth.axis"] =
      fmt_g(params.axis.x()) + "," + fmt_g(params.axis.y()) + "," + fmt_g(params.axis.z());
  eff["synth.bump_height"] = fmt_g(params.bump_height);
  eff["synth.bump_sigma"] = fmt_g(params.bump_sigma);
  eff["synth.bump_dir"] = fmt_g(params.bump_dir.x()) + "," + fmt_g(params.bump_dir.y()) + "," +
                          fmt_g(params.bump_dir.z());
  eff["synth.semi_axes"] = fmt_g(params.semi_axes.x()) + "," + fmt_g(params.semi_axes.y()) + "," +
                           fmt_g(params.semi_axes.z());
  eff["synth.hole_area_fraction"] = fmt_g(params.hole_area_fraction);
  eff["synth.gt_subdiv"] = std::to_string(params.gt_subdiv);
  eff["synth.with_normals"] = params.with_normals ? "true" : "false";
  std::string times;
  for (std::size_t i = 0; i < params.gt_times.size(); ++i)
    times += (i ? "," : "") + fmt_g(params.gt_times[i]);
  eff["synth.gt_times"] = times;

  write_manifest(run_dir, "make-synthetic", canonical_config_text(eff), seed, {}, outputs);
  std::cout << run_dir.string() << '\n';
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::vector<std::string>& sets,
               const std::string& protocol, const std::string& run_dir_name,
               const std::string& gt_dir) {
  ConfigMap base = load_config(config_path);
  apply_overrides(base, sets);

  std::vector<std::pair<std::string, ConfigMap>> variants;
  const auto with = [&](const std::string& name, const std::string& key,
                        const std::string& value) {
    ConfigMap m = base;
    m[key] = value;
    variants.emplace_back(name, std::move(m));
  };
  if (protocol == "formulation") {
    with("mlse", "mode.formulation", "mlse");
    with("olse", "mode.formulation", "olse");
  } else if (protocol == "div_free") {
    base.erase("mode.div_free");
    with("div_on", "weights.lambda_div", "1");
    with("div_off", "weights.lambda_div", "0");
  } else if (protocol == "correspondence") {
    for (const double f : {0.01, 0.05, 0.10, 0.20}) {
      char name[32];
      std::snprintf(name, sizeof name, "frac_%g", f);
      with(name, "data.correspondence_fraction", fmt_g(f));
    }
  } else if (protocol == "noise") {
    for (const double f : {0.0, 0.05, 0.10, 0.20}) {
      char name[32];
      std::snprintf(name, sizeof name, "noise_%g", f);
      with(name, "data.correspondence_noise", fmt_g(f));
    }
  } else {
    throw ConfigError(
        "ablate: protocol must be one of formulation, div_free, correspondence, noise");
  }

  const RunSpec base_spec = RunSpec::from_config(variants.front().second);
  base_spec.validate();
  const fs::path run_dir = make_run_dir(base_spec.output, run_dir_name, "ablate-" + protocol);

  std::ofstream summary(run_dir / "summary.csv");
  if (!summary) throw IoError("cannot write summary.csv in " + run_dir.string());
  summary << "variant,t,final_total,eikonal,cd,hd\n";

  for (const auto& [name, cfg] : variants) {
    std::fprintf(stderr, "=== variant %s ===\n", name.c_str());
    const fs::path vdir = run_dir / "variants" / name;
    fs::create_directories(vdir);
    TrainOutcome res = run_training(cfg, vdir, "");
    const RunSpec vspec = RunSpec::from_config(cfg);
    const std::vector<Extracted> meshes =
        extract_meshes(res.state, vspec.extract_times, vspec.resolution, vdir);

    for (const Extracted& e : meshes) {
      const double eik = mesh_eikonal_residual(res.state.F, e.normalized, e.t);
      double cd = std::numeric_limits<double>::quiet_NaN();
      double hd = cd;
      if (!gt_dir.empty()) {
        const fs::path gt = fs::path(gt_dir) / ("gt_t" + fmt_time_tag(e.t) + ".obj");
        if (!fs::exists(gt)) throw IoError("ablate: missing ground truth mesh " + gt.string());
        const TriMesh A = load_mesh_obj(e.path.string());
        const TriMesh B = load_mesh_obj(gt.string());
        const PointCloud a = sample_mesh_surface(A, 10000, derive_seed(vspec.train.seed, 0));
        const PointCloud b = sample_mesh_surface(B, 10000, derive_seed(vspec.train.seed, 1));
        const MetricReport rep = compare_point_sets(a.points, b.points);
        cd = rep.cd;
        hd = rep.hd;
      }
      summary << name << ',' << fmt_time_tag(e.t) << ',' << fmt_g(res.last_row.loss.total) << ','
              << fmt_g(eik) << ',' << fmt_g(cd) << ',' << fmt_g(hd) << '\n';
    }
  }
  summary.close();

  write_manifest(run_dir, "ablate", canonical_config_text(base), base_spec.train.seed,
                 {config_path}, {run_dir / "summary.csv"});
  std::cout << run_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"Level-set interpolation between point-cloud pairs"};
  app.require_subcommand(1);

  // train
  std::string config_path, run_dir_name, resume;
  std::vector<std::string> sets;
  auto* train_cmd = app.add_subcommand("train", "Fit the implicit and velocity networks");
  train_cmd->add_option("--config", config_path, "Run config file")->required();
  train_cmd->add_option("--set", sets, "Override: section.key=value");
  train_cmd->add_option("--run-dir", run_dir_name, "Run directory name (default: timestamped)");
  train_cmd->add_option("--resume", resume, "Checkpoint to resume from");

  // extract
  std::string ckpt, times_str = "0,0.25,0.5,0.75,1", ex_out = "out";
  int resolution = 128, trajectories = 0;
  auto* extract_cmd = app.add_subcommand("extract", "Extract level-set meshes from a checkpoint");
  extract_cmd->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  extract_cmd->add_option("--times", times_str, "Comma-separated times in [0,1]");
  extract_cmd->add_option("--resolution", resolution, "Marching-cubes grid resolution");
  extract_cmd->add_option("--out", ex_out, "Output parent directory");
  extract_cmd->add_option("--run-dir", run_dir_name, "Run directory name");
  extract_cmd->add_option("--trajectories", trajectories, "Also trace N surface trajectories");

  // eval
  std::string mesh_path, gt_path, ev_out;
  int samples = 10000;
  std::uint64_t ev_seed = 0;
  auto* eval_cmd = app.add_subcommand("eval", "Chamfer/Hausdorff between two meshes");
  eval_cmd->add_option("--mesh", mesh_path, "Mesh under test (.obj)")->required();
  eval_cmd->add_option("--gt", gt_path, "Reference mesh (.obj)")->required();
  eval_cmd->add_option("--samples", samples, "Surface samples per mesh");
  eval_cmd->add_option("--seed", ev_seed, "Sampling seed");
  eval_cmd->add_option("--out", ev_out, "Optional output parent directory");
  eval_cmd->add_option("--run-dir", run_dir_name, "Run directory name");

  // make-synthetic
  std::string kind, syn_out = "data";
  std::uint64_t syn_seed = 1;
  SynthParams params;
  std::string offset_s = "0.3,0,0", axis_s = "0,0,1", bump_dir_s = "1,0,0",
              axes_s = "1.3,0.85,0.9", gt_times_s = "0,0.25,0.5,0.75,1";
  bool no_normals = false;
  auto* syn_cmd = app.add_subcommand("make-synthetic", "Generate a ground-truth pair");
  syn_cmd->add_option("--kind", kind,
                      "translated_sphere | rotating_bump | sphere_to_ellipsoid | holed_pair")
      ->required();
  syn_cmd->add_option("--out", syn_out, "Output parent directory");
  syn_cmd->add_option("--run-dir", run_dir_name, "Run directory name");
  syn_cmd->add_option("--n", params.n, "Points per cloud");
  syn_cmd->add_option("--seed", syn_seed, "Generator seed");
  syn_cmd->add_option("--radius", params.radius, "Base sphere radius");
  syn_cmd->add_option("--offset", offset_s, "Translation x,y,z");
  syn_cmd->add_option("--angle-deg", params.angle_deg, "Rotation angle (degrees)");
  syn_cmd->add_option("--axis", axis_s, "Rotation axis x,y,z");
  syn_cmd->add_option("--bump-height", params.bump_height, "Bump height (relative)");
  syn_cmd->add_option("--bump-sigma", params.bump_sigma, "Bump width");
  syn_cmd->add_option("--bump-dir", bump_dir_s, "Bump direction x,y,z");
  syn_cmd->add_option("--axes", axes_s, "Ellipsoid semi-axes (relative) x,y,z");
  syn_cmd->add_option("--hole-frac", params.hole_area_fraction, "Deleted cap area fraction");
  syn_cmd->add_option("--gt-times", gt_times_s, "Ground-truth mesh times");
  syn_cmd->add_option("--gt-subdiv", params.gt_subdiv, "Icosphere subdivisions for ground truth");
  syn_cmd->add_flag("--no-normals", no_normals, "Do not write normals");

  // ablate
  std::string protocol, gt_dir;
  auto* ablate_cmd = app.add_subcommand("ablate", "Run an ablation protocol");
  ablate_cmd->add_option("--config", config_path, "Base run config file")->required();
  ablate_cmd->add_option("--protocol", protocol, "formulation | div_free | correspondence | noise")
      ->required();
  ablate_cmd->add_option("--set", sets, "Override: section.key=value");
  ablate_cmd->add_option("--run-dir", run_dir_name, "Run directory name");
  ablate_cmd->add_option("--gt-dir", gt_dir, "Directory with gt_t<T>.obj meshes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(config_path, sets, run_dir_name, resume);
    if (*extract_cmd)
      return cmd_extract(ckpt, times_str, resolution, ex_out, run_dir_name, trajectories);
    if (*eval_cmd) return cmd_eval(mesh_path, gt_path, samples, ev_seed, ev_out, run_dir_name);
    if (*syn_cmd) {
      params.offset = parse_vec3(offset_s, "--offset");
      params.axis = parse_vec3(axis_s, "--axis");
      params.bump_dir = parse_vec3(bump_dir_s, "--bump-dir");
      params.semi_axes = parse_vec3(axes_s, "--axes");
      params.gt_times = parse_double_list(gt_times_s);
      params.with_normals = !no_normals;
      return cmd_make_synthetic(kind, params, syn_seed, syn_out, run_dir_name);
    }
    if (*ablate_cmd) return cmd_ablate(config_path, sets, protocol, run_dir_name, gt_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
