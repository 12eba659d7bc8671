#include "lsflow/cli_io.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lsflow/rng.hpp"

namespace lsflow {

namespace {

std::string lowercase_ext(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for read: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  return out;
}

double parse_double_tok(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw IoError(where + ": bad number '" + tok + "'");
  return v;
}

long long parse_int_tok(const std::string& tok, const std::string& where) {
  long long v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw IoError(where + ": bad integer '" + tok + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

// ---- xyz ------------------------------------------------------------------

PointCloud load_xyz(const std::string& path) {
  std::ifstream in = open_input(path);
  PointCloud pc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split_ws(t);
    const std::string where = path + ":" + std::to_string(lineno);
    if (toks.size() != 3 && toks.size() != 6)
      throw IoError(where + ": expected 3 or 6 columns, got " + std::to_string(toks.size()));
    pc.points.emplace_back(parse_double_tok(toks[0], where), parse_double_tok(toks[1], where),
                           parse_double_tok(toks[2], where));
    if (toks.size() == 6)
      pc.normals.emplace_back(parse_double_tok(toks[3], where), parse_double_tok(toks[4], where),
                              parse_double_tok(toks[5], where));
  }
  if (!pc.normals.empty() && pc.normals.size() != pc.points.size())
    throw IoError(path + ": some lines carry normals and some do not");
  return pc;
}

// ---- ply (ascii) ----------------------------------------------------------

PointCloud load_ply(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ply")
    throw IoError(path + ": not a PLY file (missing 'ply' magic)");

  struct ElementDecl {
    std::string name;
    long long count = 0;
    std::vector<std::string> props;  // scalar property names, in order
  };
  std::vector<ElementDecl> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    const auto toks = split_ws(trim(line));
    if (toks.empty() || toks[0] == "comment") continue;
    if (toks[0] == "format") {
      if (toks.size() < 2 || toks[1] != "ascii")
        throw IoError(path + ": only ascii PLY is supported");
      ascii = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) throw IoError(path + ": malformed element declaration");
      elements.push_back({toks[1], parse_int_tok(toks[2], path), {}});
    } else if (toks[0] == "property") {
      if (elements.empty()) throw IoError(path + ": property before any element");
      if (toks.size() >= 2 && toks[1] == "list")
        elements.back().props.push_back("list");
      else if (toks.size() == 3)
        elements.back().props.push_back(toks[2]);
      else
        throw IoError(path + ": malformed property declaration");
    } else if (toks[0] == "end_header") {
      break;
    } else {
      throw IoError(path + ": unexpected header line '" + trim(line) + "'");
    }
  }
  if (!ascii) throw IoError(path + ": missing format declaration");

  PointCloud pc;
  for (const ElementDecl& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
      for (std::size_t k = 0; k < el.props.size(); ++k) {
        if (el.props[k] == "x") ix = static_cast<int>(k);
        if (el.props[k] == "y") iy = static_cast<int>(k);
        if (el.props[k] == "z") iz = static_cast<int>(k);
        if (el.props[k] == "nx") inx = static_cast<int>(k);
        if (el.props[k] == "ny") iny = static_cast<int>(k);
        if (el.props[k] == "nz") inz = static_cast<int>(k);
      }
      if (ix < 0 || iy < 0 || iz < 0)
        throw IoError(path + ": vertex element lacks x/y/z properties");
      const bool with_n = inx >= 0 && iny >= 0 && inz >= 0;
      for (long long i = 0; i < el.count; ++i) {
        if (!std::getline(in, line)) throw IoError(path + ": truncated vertex data");
        const auto toks = split_ws(trim(line));
        if (toks.size() < el.props.size())
          throw IoError(path + ": short vertex line " + std::to_string(i));
        const std::string where = path + " vertex " + std::to_string(i);
        pc.points.emplace_back(parse_double_tok(toks[static_cast<std::size_t>(ix)], where),
                               parse_double_tok(toks[static_cast<std::size_t>(iy)], where),
                               parse_double_tok(toks[static_cast<std::size_t>(iz)], where));
        if (with_n)
          pc.normals.emplace_back(parse_double_tok(toks[static_cast<std::size_t>(inx)], where),
                                  parse_double_tok(toks[static_cast<std::size_t>(iny)], where),
                                  parse_double_tok(toks[static_cast<std::size_t>(inz)], where));
      }
    } else {
      // skip any other element's payload line by line
      for (long long i = 0; i < el.count; ++i)
        if (!std::getline(in, line)) throw IoError(path + ": truncated " + el.name + " data");
    }
  }
  return pc;
}

// ---- obj ------------------------------------------------------------------

int obj_index(const std::string& tok, std::size_t n_vertices, const std::string& where) {
  // "i", "i/j", "i//k", "i/j/k"; 1-based, negative counts from the end
  const auto slash = tok.find('/');
  const long long raw = parse_int_tok(slash == std::string::npos ? tok : tok.substr(0, slash),
                                      where);
  long long idx = raw > 0 ? raw - 1 : static_cast<long long>(n_vertices) + raw;
  if (idx < 0 || idx >= static_cast<long long>(n_vertices))
    throw IoError(where + ": vertex index " + std::to_string(raw) + " out of range");
  return static_cast<int>(idx);
}

}  // namespace

PointCloud load_point_cloud(const std::string& path) {
  const std::string ext = lowercase_ext(path);
  PointCloud pc;
  if (ext == "xyz") {
    pc = load_xyz(path);
  } else if (ext == "ply") {
    pc = load_ply(path);
  } else if (ext == "obj") {
    std::ifstream in = open_input(path);
    std::string line;
    std::vector<Vec3> vn;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto toks = split_ws(trim(line));
      if (toks.empty()) continue;
      const std::string where = path + ":" + std::to_string(lineno);
      if (toks[0] == "v") {
        if (toks.size() < 4) throw IoError(where + ": short vertex line");
        pc.points.emplace_back(parse_double_tok(toks[1], where), parse_double_tok(toks[2], where),
                               parse_double_tok(toks[3], where));
      } else if (toks[0] == "vn") {
        if (toks.size() < 4) throw IoError(where + ": short normal line");
        vn.emplace_back(parse_double_tok(toks[1], where), parse_double_tok(toks[2], where),
                        parse_double_tok(toks[3], where));
      }
    }
    if (vn.size() == pc.points.size()) pc.normals = std::move(vn);
  } else {
    throw IoError("unsupported point-cloud extension '" + ext + "': " + path);
  }
  if (pc.points.empty()) throw IoError(path + ": no points");
  pc.validate();
  return pc;
}

void save_point_cloud_xyz(const std::string& path, const PointCloud& pc) {
  pc.validate();
  std::ofstream out = open_output(path);
  char buf[160];
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    const Vec3& p = pc.points[i];
    if (pc.has_normals()) {
      const Vec3& n = pc.normals[i];
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g\n", p.x(), p.y(), p.z(),
                    n.x(), n.y(), n.z());
    } else {
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    }
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

TriMesh load_mesh_obj(const std::string& path) {
  std::ifstream in = open_input(path);
  TriMesh mesh;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(trim(line));
    if (toks.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (toks[0] == "v") {
      if (toks.size() < 4) throw IoError(where + ": short vertex line");
      mesh.vertices.emplace_back(parse_double_tok(toks[1], where),
                                 parse_double_tok(toks[2], where),
                                 parse_double_tok(toks[3], where));
    } else if (toks[0] == "f") {
      if (toks.size() < 4) throw IoError(where + ": face needs at least 3 vertices");
      std::vector<int> poly;
      for (std::size_t k = 1; k < toks.size(); ++k)
        poly.push_back(obj_index(toks[k], mesh.vertices.size(), where));
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return mesh;
}

void save_mesh_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out = open_output(path);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw IoError("write failed: " + path);
}

CorrespondenceSet load_correspondences(const std::string& path) {
  std::ifstream in = open_input(path);
  CorrespondenceSet C;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto toks = split_ws(t);
    const std::string where = path + ":" + std::to_string(lineno);
    if (toks.size() != 2) throw IoError(where + ": expected 'i j'");
    const long long i = parse_int_tok(toks[0], where);
    const long long j = parse_int_tok(toks[1], where);
    if (i < 0 || j < 0) throw IoError(where + ": indices must be >= 0");
    C.pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
  }
  return C;
}

void save_correspondences(const std::string& path, const CorrespondenceSet& C) {
  std::ofstream out = open_output(path);
  for (const Correspondence& c : C.pairs) out << c.i << ' ' << c.j << '\n';
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = "config line " + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ConfigError(where + ": malformed section");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    if (cfg.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
    cfg[full] = value;
  }
  return cfg;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw ConfigError("config: bad boolean '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    const std::string t = trim(cur);
    if (t.empty()) throw ConfigError("config: empty entry in list '" + s + "'");
    double v = 0.0;
    const char* b = t.data();
    const char* e = b + t.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e) throw ConfigError("config: bad number '" + t + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config: empty list");
  return out;
}

namespace {

double cfg_double(const std::string& v) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  const auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc{} || p != e) throw ConfigError("config: bad number '" + v + "'");
  return x;
}

int cfg_int(const std::string& v) {
  long long x = 0;
  const char* b = v.data();
  const char* e = b + v.size();
  const auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc{} || p != e || x < INT_MIN || x > INT_MAX)
    throw ConfigError("config: bad integer '" + v + "'");
  return static_cast<int>(x);
}

std::uint64_t cfg_u64(const std::string& v) {
  std::uint64_t x = 0;
  const char* b = v.data();
  const char* e = b + v.size();
  const auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc{} || p != e) throw ConfigError("config: bad seed '" + v + "'");
  return x;
}

}  // namespace

RunSpec RunSpec::from_config(const ConfigMap& cfg) {
  RunSpec spec;
  bool saw_div_free = false, div_free = false, saw_lambda_div = false;
  for (const auto& [key, v] : cfg) {
    if (key == "data.p0") spec.p0_path = v;
    else if (key == "data.p1") spec.p1_path = v;
    else if (key == "data.correspondences") spec.correspondence_path = v;
    else if (key == "data.output") spec.output = v;
    else if (key == "data.correspondence_fraction") spec.correspondence_fraction = cfg_double(v);
    else if (key == "data.correspondence_noise") spec.correspondence_noise = cfg_double(v);
    else if (key == "train.epochs") spec.train.epochs = cfg_int(v);
    else if (key == "train.batch_size") spec.train.batch_size = cfg_int(v);
    else if (key == "train.lr") spec.train.lr = cfg_double(v);
    else if (key == "train.lr_decay") spec.train.lr_decay = cfg_double(v);
    else if (key == "train.lr_decay_interval") spec.train.lr_decay_interval = cfg_int(v);
    else if (key == "train.warmup_epochs") spec.train.warmup_epochs = cfg_int(v);
    else if (key == "train.ramp_end") spec.train.ramp_end = cfg_int(v);
    else if (key == "train.velocity_freeze_epoch") spec.train.velocity_freeze_epoch = cfg_int(v);
    else if (key == "train.T") spec.train.T = cfg_int(v);
    else if (key == "train.seed") spec.train.seed = cfg_u64(v);
    else if (key == "train.grad_clip") spec.train.grad_clip = cfg_double(v);
    else if (key == "train.strict_freeze") spec.train.strict_freeze = parse_bool(v);
    else if (key == "train.checkpoint_interval") spec.train.checkpoint_interval = cfg_int(v);
    else if (key == "train.sigma_near") spec.train.sigma_near = cfg_double(v);
    else if (key == "train.rho_near") spec.train.rho_near = cfg_double(v);
    else if (key == "train.time_jitter") spec.train.time_jitter = cfg_double(v);
    else if (key == "train.pde_batch") spec.train.pde_batch = cfg_int(v);
    else if (key == "train.velocity_batch") spec.train.velocity_batch = cfg_int(v);
    else if (key == "train.match_points") spec.train.match_points = cfg_int(v);
    else if (key == "train.match_pairs") spec.train.match_pairs = cfg_int(v);
    else if (key == "model.implicit_width") spec.train.implicit_width = cfg_int(v);
    else if (key == "model.implicit_depth") spec.train.implicit_depth = cfg_int(v);
    else if (key == "model.velocity_width") spec.train.velocity_width = cfg_int(v);
    else if (key == "model.velocity_depth") spec.train.velocity_depth = cfg_int(v);
    else if (key == "model.encoding_m") spec.train.enc.m = cfg_int(v);
    else if (key == "model.beta") spec.train.beta = cfg_double(v);
    else if (key == "model.sphere_radius") spec.train.sphere_radius = cfg_double(v);
    else if (key == "weights.lambda_f") spec.train.weights.lambda_f = cfg_double(v);
    else if (key == "weights.lambda_v") spec.train.weights.lambda_v = cfg_double(v);
    else if (key == "weights.lambda_m") spec.train.weights.lambda_m = cfg_double(v);
    else if (key == "weights.lambda_l") spec.train.weights.lambda_l = cfg_double(v);
    else if (key == "weights.lambda_div") {
      spec.train.weights.lambda_div = cfg_double(v);
      saw_lambda_div = true;
    } else if (key == "weights.alpha") spec.train.weights.alpha = cfg_double(v);
    else if (key == "weights.gamma") spec.train.weights.gamma = cfg_double(v);
    else if (key == "mode.formulation") {
      if (v == "mlse") spec.train.weights.mode = EikonalMode::MLSE;
      else if (v == "olse") spec.train.weights.mode = EikonalMode::OLSE;
      else throw ConfigError("config: mode.formulation must be mlse or olse, got '" + v + "'");
    } else if (key == "mode.div_free") {
      div_free = parse_bool(v);
      saw_div_free = true;
    } else if (key == "mode.use_normals") spec.train.use_normals = parse_bool(v);
    else if (key == "extract.times") spec.extract_times = parse_double_list(v);
    else if (key == "extract.resolution") spec.resolution = cfg_int(v);
    else if (key == "extract.trajectories") spec.trajectory_count = cfg_int(v);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (saw_div_free && saw_lambda_div)
    throw ConfigError("config: mode.div_free conflicts with explicit weights.lambda_div");
  if (saw_div_free) spec.train.weights.lambda_div = div_free ? 1.0 : 0.0;
  return spec;
}

void RunSpec::validate() const {
  namespace fs = std::filesystem;
  for (const std::string* p : {&p0_path, &p1_path, &correspondence_path})
    if (!p->empty() && !fs::exists(*p)) throw IoError("input file does not exist: " + *p);
  for (const double t : extract_times)
    if (!(t >= 0.0 && t <= 1.0))
      throw ConfigError("config: extraction times must lie in [0,1]");
  if (extract_times.empty()) throw ConfigError("config: extraction time list is empty");
  if (!(correspondence_fraction > 0.0 && correspondence_fraction <= 1.0))
    throw ConfigError("config: correspondence_fraction must be in (0,1]");
  if (!(correspondence_noise >= 0.0 && correspondence_noise < 1.0))
    throw ConfigError("config: correspondence_noise must be in [0,1)");
  if (trajectory_count < 0) throw ConfigError("config: trajectories must be >= 0");
  train.validate();
}

std::string canonical_config_text(const ConfigMap& cfg) {
  std::string out, section;
  for (const auto& [key, v] : cfg) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? std::string() : key.substr(0, dot);
    if (sec != section) {
      if (!out.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + v + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path);
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

void SynthParams::validate() const {
  if (n < 1) throw ConfigError("make_synthetic: n must be >= 1");
  if (!(radius > 0.0)) throw ConfigError("make_synthetic: radius must be positive");
  if (!(bump_sigma > 0.0)) throw ConfigError("make_synthetic: bump_sigma must be positive");
  if (!(bump_height > -0.9)) throw ConfigError("make_synthetic: bump_height must be > -0.9");
  if (!(semi_axes.minCoeff() > 0.0))
    throw ConfigError("make_synthetic: semi_axes must be positive");
  if (!(hole_area_fraction >= 0.05 && hole_area_fraction <= 0.45))
    throw ConfigError("make_synthetic: hole_area_fraction must be in [0.05, 0.45]");
  if (axis.norm() < 1e-12) throw ConfigError("make_synthetic: axis must be nonzero");
  if (bump_dir.norm() < 1e-12) throw ConfigError("make_synthetic: bump_dir must be nonzero");
  if (gt_subdiv < 0 || gt_subdiv > 7)
    throw ConfigError("make_synthetic: gt_subdiv must be in [0, 7]");
  for (const double t : gt_times)
    if (!(t >= 0.0 && t <= 1.0))
      throw ConfigError("make_synthetic: gt_times must lie in [0,1]");
}

namespace {

// bump profile rho(mu) = r (1 + h exp(-(1-mu)^2 / 2 sigma^2)), mu = u.bump_dir
double bump_rho(double mu, const SynthParams& q) {
  const double d = 1.0 - mu;
  return q.radius * (1.0 + q.bump_height * std::exp(-d * d / (2.0 * q.bump_sigma * q.bump_sigma)));
}

double bump_drho_dmu(double mu, const SynthParams& q) {
  const double s2 = q.bump_sigma * q.bump_sigma;
  const double d = 1.0 - mu;
  return q.radius * q.bump_height * std::exp(-d * d / (2.0 * s2)) * d / s2;
}

Vec3 bump_normal(const Vec3& u, const SynthParams& q, const Vec3& bdir) {
  // gradient of ||x|| - rho(x_hat . bdir) at x = rho u
  const double mu = u.dot(bdir);
  const Vec3 g = u - bump_drho_dmu(mu, q) / bump_rho(mu, q) * (bdir - mu * u);
  return g.normalized();
}

std::vector<Vec3> sample_dirs(int n, Rng& rng) {
  std::vector<Vec3> dirs(static_cast<std::size_t>(n));
  for (Vec3& u : dirs) u = rng.unit_vector();
  return dirs;
}

}  // namespace

SyntheticData make_synthetic(const std::string& kind, const SynthParams& params,
                             std::uint64_t seed) {
  params.validate();
  const SynthParams& q = params;
  Rng rng(seed);
  SyntheticData out;
  out.gt_times = q.gt_times;

  if (kind == "translated_sphere") {
    const std::vector<Vec3> dirs = sample_dirs(q.n, rng);
    for (const Vec3& u : dirs) {
      out.P0.points.push_back(q.radius * u);
      out.P1.points.push_back(q.radius * u + q.offset);
      if (q.with_normals) {
        out.P0.normals.push_back(u);
        out.P1.normals.push_back(u);
      }
      out.C.pairs.push_back({static_cast<int>(out.P0.points.size()) - 1,
                             static_cast<int>(out.P1.points.size()) - 1});
    }
    for (const double s : q.gt_times) {
      TriMesh m = icosphere(q.radius, q.gt_subdiv);
      for (Vec3& v : m.vertices) v += s * q.offset;
      out.gt_meshes.push_back(std::move(m));
    }
  } else if (kind == "rotating_bump") {
    const Vec3 bdir = q.bump_dir.normalized();
    const Vec3 axis = q.axis.normalized();
    const double theta = q.angle_deg * M_PI / 180.0;
    const Mat3 R_full = Eigen::AngleAxisd(theta, axis).toRotationMatrix();
    const std::vector<Vec3> dirs = sample_dirs(q.n, rng);
    for (const Vec3& u : dirs) {
      const Vec3 p = bump_rho(u.dot(bdir), q) * u;
      out.P0.points.push_back(p);
      out.P1.points.push_back(R_full * p);
      if (q.with_normals) {
        const Vec3 nrm = bump_normal(u, q, bdir);
        out.P0.normals.push_back(nrm);
        out.P1.normals.push_back(R_full * nrm);
      }
      out.C.pairs.push_back({static_cast<int>(out.P0.points.size()) - 1,
                             static_cast<int>(out.P1.points.size()) - 1});
    }
    for (const double s : q.gt_times) {
      const Mat3 Rs = Eigen::AngleAxisd(s * theta, axis).toRotationMatrix();
      TriMesh m = icosphere(1.0, q.gt_subdiv);
      for (Vec3& v : m.vertices) {
        const Vec3 u = v.normalized();
        v = Rs * (bump_rho(u.dot(bdir), q) * u);
      }
      out.gt_meshes.push_back(std::move(m));
    }
  } else if (kind == "sphere_to_ellipsoid") {
    const std::vector<Vec3> dirs = sample_dirs(q.n, rng);
    for (const Vec3& u : dirs) {
      out.P0.points.push_back(q.radius * u);
      out.P1.points.push_back(q.radius * q.semi_axes.cwiseProduct(u));
      if (q.with_normals) {
        out.P0.normals.push_back(u);
        out.P1.normals.push_back(u.cwiseQuotient(q.semi_axes).normalized());
      }
      out.C.pairs.push_back({static_cast<int>(out.P0.points.size()) - 1,
                             static_cast<int>(out.P1.points.size()) - 1});
    }
    for (const double s : q.gt_times) {
      const Vec3 ax = (1.0 - s) * Vec3::Ones() + s * q.semi_axes;
      TriMesh m = icosphere(q.radius, q.gt_subdiv);
      for (Vec3& v : m.vertices) v = ax.cwiseProduct(v);
      out.gt_meshes.push_back(std::move(m));
    }
  } else if (kind == "holed_pair") {
    // disjoint spherical caps removed: +z cap from P0, -z cap from P1
    const double cos_alpha = 1.0 - 2.0 * q.hole_area_fraction;
    const std::vector<Vec3> dirs = sample_dirs(q.n, rng);
    std::vector<int> idx0(dirs.size(), -1), idx1(dirs.size(), -1);
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const Vec3& u = dirs[k];
      if (u.z() <= cos_alpha) {
        idx0[k] = static_cast<int>(out.P0.points.size());
        out.P0.points.push_back(q.radius * u);
        if (q.with_normals) out.P0.normals.push_back(u);
      }
      if (-u.z() <= cos_alpha) {
        idx1[k] = static_cast<int>(out.P1.points.size());
        out.P1.points.push_back(q.radius * u + q.offset);
        if (q.with_normals) out.P1.normals.push_back(u);
      }
      if (idx0[k] >= 0 && idx1[k] >= 0) out.C.pairs.push_back({idx0[k], idx1[k]});
    }
    if (out.P0.points.empty() || out.P1.points.empty())
      throw ConfigError("make_synthetic: holed_pair produced an empty cloud (n too small)");
    for (const double s : q.gt_times) {
      // ground truth is the complete moving sphere; only the inputs have holes
      TriMesh m = icosphere(q.radius, q.gt_subdiv);
      for (Vec3& v : m.vertices) v += s * q.offset;
      out.gt_meshes.push_back(std::move(m));
    }
  } else {
    throw ConfigError("make_synthetic: unknown kind '" + kind + "'");
  }

  out.P0.validate();
  out.P1.validate();
  out.C.validate(out.P0.size(), out.P1.size());
  return out;
}

}  // namespace lsflow
