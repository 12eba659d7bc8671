#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsflow/cli_io.hpp"
#include "lsflow/fields.hpp"
#include "lsflow/flow.hpp"
#include "lsflow/losses.hpp"
#include "lsflow/rng.hpp"
#include "lsflow/sampler.hpp"
#include "lsflow/surface.hpp"
#include "lsflow/trainer.hpp"

namespace py = pybind11;
using namespace lsflow;

namespace {

Eigen::MatrixXd to_mat(const std::vector<Vec3>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = v[static_cast<std::size_t>(i)];
  return m;
}

std::vector<Vec3> to_vecs(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.cols() != 3) throw DimensionError("expected an (n, 3) array");
  std::vector<Vec3> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m.row(i);
  return v;
}

Eigen::MatrixXi pairs_to_mat(const CorrespondenceSet& C) {
  Eigen::MatrixXi m(static_cast<Eigen::Index>(C.size()), 2);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    m(r, 0) = C.pairs[static_cast<std::size_t>(r)].i;
    m(r, 1) = C.pairs[static_cast<std::size_t>(r)].j;
  }
  return m;
}

CorrespondenceSet mat_to_pairs(const Eigen::Ref<const Eigen::MatrixXi>& m) {
  if (m.cols() != 2) throw DimensionError("expected an (n, 2) index array");
  CorrespondenceSet C;
  C.pairs.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    C.pairs[static_cast<std::size_t>(r)] = {m(r, 0), m(r, 1)};
  return C;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Level-set interpolation between point-cloud pairs";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  // ---- data types ---------------------------------------------------------
  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init<>())
      .def_property(
          "points", [](const PointCloud& p) { return to_mat(p.points); },
          [](PointCloud& p, const Eigen::Ref<const Eigen::MatrixXd>& v) { p.points = to_vecs(v); })
      .def_property(
          "normals", [](const PointCloud& p) { return to_mat(p.normals); },
          [](PointCloud& p, const Eigen::Ref<const Eigen::MatrixXd>& v) {
            p.normals = to_vecs(v);
          })
      .def("has_normals", &PointCloud::has_normals)
      .def("__len__", &PointCloud::size);

  py::class_<CorrespondenceSet>(m, "CorrespondenceSet")
      .def(py::init<>())
      .def(py::init([](const Eigen::Ref<const Eigen::MatrixXi>& p) { return mat_to_pairs(p); }))
      .def_property(
          "pairs", [](const CorrespondenceSet& c) { return pairs_to_mat(c); },
          [](CorrespondenceSet& c, const Eigen::Ref<const Eigen::MatrixXi>& p) {
            c = mat_to_pairs(p);
          })
      .def("validate", &CorrespondenceSet::validate, py::arg("n0"), py::arg("n1"))
      .def("__len__", &CorrespondenceSet::size);

  py::class_<TriMesh>(m, "TriMesh")
      .def(py::init<>())
      .def_property(
          "vertices", [](const TriMesh& t) { return to_mat(t.vertices); },
          [](TriMesh& t, const Eigen::Ref<const Eigen::MatrixXd>& v) { t.vertices = to_vecs(v); })
      .def_property(
          "triangles",
          [](const TriMesh& t) {
            Eigen::MatrixXi f(static_cast<Eigen::Index>(t.triangles.size()), 3);
            for (Eigen::Index r = 0; r < f.rows(); ++r)
              for (int c = 0; c < 3; ++c) f(r, c) = t.triangles[static_cast<std::size_t>(r)][c];
            return f;
          },
          [](TriMesh& t, const Eigen::Ref<const Eigen::MatrixXi>& f) {
            if (f.cols() != 3) throw DimensionError("expected an (n, 3) index array");
            t.triangles.resize(static_cast<std::size_t>(f.rows()));
            for (Eigen::Index r = 0; r < f.rows(); ++r)
              t.triangles[static_cast<std::size_t>(r)] = {f(r, 0), f(r, 1), f(r, 2)};
          })
      .def("empty", &TriMesh::empty);

  py::class_<NormalizationTransform>(m, "NormalizationTransform")
      .def(py::init<>())
      .def_readwrite("center", &NormalizationTransform::center)
      .def_readwrite("scale", &NormalizationTransform::scale)
      .def("apply", &NormalizationTransform::apply, py::arg("x"))
      .def("invert", &NormalizationTransform::invert, py::arg("y"))
      .def("apply_rows",
           [](const NormalizationTransform& T, const Eigen::Ref<const Eigen::MatrixXd>& X) {
             std::vector<Vec3> v = to_vecs(X);
             for (Vec3& x : v) x = T.apply(x);
             return to_mat(v);
           })
      .def("invert_rows",
           [](const NormalizationTransform& T, const Eigen::Ref<const Eigen::MatrixXd>& Y) {
             std::vector<Vec3> v = to_vecs(Y);
             for (Vec3& y : v) y = T.invert(y);
             return to_mat(v);
           });

  py::class_<NormalizedPair>(m, "NormalizedPair")
      .def_readonly("P0", &NormalizedPair::P0)
      .def_readonly("P1", &NormalizedPair::P1)
      .def_readonly("transform", &NormalizedPair::transform);

  // ---- configuration ------------------------------------------------------
  py::enum_<EikonalMode>(m, "EikonalMode")
      .value("MLSE", EikonalMode::MLSE)
      .value("OLSE", EikonalMode::OLSE);

  py::enum_<PerturbMode>(m, "PerturbMode")
      .value("LocalKSwap", PerturbMode::LocalKSwap)
      .value("GlobalSwap", PerturbMode::GlobalSwap);

  py::class_<EncodingConfig>(m, "EncodingConfig")
      .def(py::init<>())
      .def_readwrite("m", &EncodingConfig::m)
      .def("dim_per_coord", &EncodingConfig::dim_per_coord)
      .def("encoded_dim", &EncodingConfig::encoded_dim, py::arg("spatial_dim"))
      .def("scale", &EncodingConfig::scale);

  py::class_<LossWeights>(m, "LossWeights")
      .def(py::init<>())
      .def_readwrite("lambda_f", &LossWeights::lambda_f)
      .def_readwrite("lambda_v", &LossWeights::lambda_v)
      .def_readwrite("lambda_m", &LossWeights::lambda_m)
      .def_readwrite("lambda_l", &LossWeights::lambda_l)
      .def_readwrite("lambda_div", &LossWeights::lambda_div)
      .def_readwrite("alpha", &LossWeights::alpha)
      .def_readwrite("gamma", &LossWeights::gamma)
      .def_readwrite("mode", &LossWeights::mode)
      .def("validate", &LossWeights::validate);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("lr_decay", &TrainConfig::lr_decay)
      .def_readwrite("lr_decay_interval", &TrainConfig::lr_decay_interval)
      .def_readwrite("warmup_epochs", &TrainConfig::warmup_epochs)
      .def_readwrite("ramp_end", &TrainConfig::ramp_end)
      .def_readwrite("velocity_freeze_epoch", &TrainConfig::velocity_freeze_epoch)
      .def_readwrite("weights", &TrainConfig::weights)
      .def_readwrite("T", &TrainConfig::T)
      .def_readwrite("enc", &TrainConfig::enc)
      .def_readwrite("beta", &TrainConfig::beta)
      .def_readwrite("sphere_radius", &TrainConfig::sphere_radius)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("implicit_width", &TrainConfig::implicit_width)
      .def_readwrite("implicit_depth", &TrainConfig::implicit_depth)
      .def_readwrite("velocity_width", &TrainConfig::velocity_width)
      .def_readwrite("velocity_depth", &TrainConfig::velocity_depth)
      .def_readwrite("sigma_near", &TrainConfig::sigma_near)
      .def_readwrite("rho_near", &TrainConfig::rho_near)
      .def_readwrite("time_jitter", &TrainConfig::time_jitter)
      .def_readwrite("grad_clip", &TrainConfig::grad_clip)
      .def_readwrite("strict_freeze", &TrainConfig::strict_freeze)
      .def_readwrite("use_normals", &TrainConfig::use_normals)
      .def_readwrite("pde_batch", &TrainConfig::pde_batch)
      .def_readwrite("velocity_batch", &TrainConfig::velocity_batch)
      .def_readwrite("match_points", &TrainConfig::match_points)
      .def_readwrite("match_pairs", &TrainConfig::match_pairs)
      .def_readwrite("checkpoint_interval", &TrainConfig::checkpoint_interval)
      .def("validate", &TrainConfig::validate);

  // ---- fields and training ------------------------------------------------
  py::class_<ImplicitField>(m, "ImplicitField").def_readonly("enc", &ImplicitField::enc);
  py::class_<VelocityField>(m, "VelocityField").def_readonly("enc", &VelocityField::enc);

  py::class_<LossBreakdown>(m, "LossBreakdown")
      .def_readonly("pde", &LossBreakdown::pde)
      .def_readonly("smooth", &LossBreakdown::smooth)
      .def_readonly("div", &LossBreakdown::div)
      .def_readonly("match_f0", &LossBreakdown::match_f0)
      .def_readonly("match_f1", &LossBreakdown::match_f1)
      .def_readonly("match_traj", &LossBreakdown::match_traj)
      .def_readonly("normal", &LossBreakdown::normal)
      .def_readonly("total", &LossBreakdown::total)
      .def_readonly("degenerate", &LossBreakdown::degenerate);

  py::class_<MetricsRow>(m, "MetricsRow")
      .def_readonly("epoch", &MetricsRow::epoch)
      .def_readonly("lr", &MetricsRow::lr)
      .def_readonly("lambda_f", &MetricsRow::lambda_f)
      .def_readonly("lambda_v", &MetricsRow::lambda_v)
      .def_readonly("lambda_m", &MetricsRow::lambda_m)
      .def_readonly("loss", &MetricsRow::loss)
      .def_readonly("skipped_steps", &MetricsRow::skipped_steps);

  py::class_<TrainState>(m, "TrainState")
      .def_readonly("F", &TrainState::F)
      .def_readonly("Vf", &TrainState::Vf)
      .def_readonly("transform", &TrainState::transform)
      .def_readonly("cfg", &TrainState::cfg)
      .def_readonly("epoch", &TrainState::epoch)
      .def_readonly("skipped_steps", &TrainState::skipped_steps)
      .def_readonly("degenerate_total", &TrainState::degenerate_total);

  m.def("init_train_state", &init_train_state, py::arg("cfg"),
        py::arg("transform") = NormalizationTransform{});
  m.def(
      "train",
      [](TrainState& st, const PointCloud& P0, const PointCloud& P1, const CorrespondenceSet& C,
         int run_epochs, const EpochCallback& on_epoch) {
        std::vector<MetricsRow> rows;
        train(st, P0, P1, C, run_epochs, &rows, on_epoch);
        return rows;
      },
      py::arg("state"), py::arg("P0"), py::arg("P1"),
      py::arg("C") = CorrespondenceSet{}, py::arg("run_epochs") = -1,
      py::arg("on_epoch") = EpochCallback{},
      "Run training epochs; returns one MetricsRow per epoch.");
  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("state"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));
  m.def(
      "lambda_schedule",
      [](int k, const TrainConfig& cfg) {
        const ResolvedLambdas r = lambda_schedule(k, cfg);
        return py::make_tuple(r.lambda_f, r.lambda_v, r.lambda_m);
      },
      py::arg("epoch"), py::arg("cfg"));

  m.def("normalize_pair", &normalize_pair, py::arg("P0"), py::arg("P1"));
  m.def(
      "select_correspondences",
      [](const CorrespondenceSet& C, double fraction, std::uint64_t seed) {
        Rng rng(seed);
        return select_correspondences(C, fraction, rng);
      },
      py::arg("C"), py::arg("fraction"), py::arg("seed") = 0);
  m.def(
      "perturb_correspondences",
      [](const CorrespondenceSet& C, const PointCloud& P1, PerturbMode mode, double fraction,
         int k, std::uint64_t seed) {
        Rng rng(seed);
        return perturb_correspondences(C, P1, mode, fraction, k, rng);
      },
      py::arg("C"), py::arg("P1"), py::arg("mode"), py::arg("fraction"), py::arg("k") = 1,
      py::arg("seed") = 0);

  // ---- field evaluation ---------------------------------------------------
  m.def(
      "sdf", [](const ImplicitField& F, const Vec3& x, double t) { return sdf(F, {x, t}); },
      py::arg("F"), py::arg("x"), py::arg("t") = 0.0);
  m.def(
      "sdf_batch",
      [](const ImplicitField& F, const Eigen::Ref<const Eigen::MatrixXd>& X, double t) {
        const std::vector<Vec3> pts = to_vecs(X);
        Eigen::VectorXd out(static_cast<Eigen::Index>(pts.size()));
        for (Eigen::Index i = 0; i < out.size(); ++i)
          out[i] = sdf(F, {pts[static_cast<std::size_t>(i)], t});
        return out;
      },
      py::arg("F"), py::arg("X"), py::arg("t") = 0.0);
  m.def(
      "sdf_grad",
      [](const ImplicitField& F, const Vec3& x, double t) { return sdf_spatial_grad(F, {x, t}); },
      py::arg("F"), py::arg("x"), py::arg("t") = 0.0);
  m.def(
      "curvature",
      [](const ImplicitField& F, const Vec3& x, double t) { return curvature(F, {x, t}); },
      py::arg("F"), py::arg("x"), py::arg("t") = 0.0);
  m.def("velocity", &velocity, py::arg("Vf"), py::arg("x"));
  m.def("velocity_divergence", &velocity_divergence, py::arg("Vf"), py::arg("x"));
  m.def(
      "integrate_trajectory",
      [](const VelocityField& Vf, const Vec3& x0, int T) {
        return to_mat(integrate_trajectory(Vf, x0, T).points);
      },
      py::arg("Vf"), py::arg("x0"), py::arg("T"));
  m.def("inverse_consistency", &inverse_consistency, py::arg("Vf"), py::arg("x0"), py::arg("T"));

  // ---- surfaces and metrics -----------------------------------------------
  m.def("extract_mesh", &extract_mesh, py::arg("F"), py::arg("t"), py::arg("resolution"));
  m.def(
      "marching_cubes",
      [](const std::function<double(const Vec3&)>& field, int resolution, double iso,
         const Vec3& lo, const Vec3& hi) { return marching_cubes(field, resolution, iso, lo, hi); },
      py::arg("field"), py::arg("resolution"), py::arg("iso") = 0.0,
      py::arg("lo") = Vec3(-1, -1, -1), py::arg("hi") = Vec3(1, 1, 1));
  m.def("mesh_volume", &mesh_volume, py::arg("mesh"));
  m.def("icosphere", &icosphere, py::arg("radius"), py::arg("subdivisions"));
  m.def("sample_mesh_surface", &sample_mesh_surface, py::arg("mesh"), py::arg("n"),
        py::arg("seed") = 0);

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("cd", &MetricReport::cd)
      .def_readonly("hd", &MetricReport::hd)
      .def("cd_scaled", &MetricReport::cd_scaled)
      .def("hd_scaled", &MetricReport::hd_scaled);
  m.def(
      "compare_point_sets",
      [](const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::MatrixXd>& B) {
        return compare_point_sets(to_vecs(A), to_vecs(B));
      },
      py::arg("A"), py::arg("B"));
  m.def(
      "chamfer",
      [](const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::MatrixXd>& B) {
        return chamfer(to_vecs(A), to_vecs(B));
      },
      py::arg("A"), py::arg("B"));
  m.def(
      "hausdorff",
      [](const Eigen::Ref<const Eigen::MatrixXd>& A, const Eigen::Ref<const Eigen::MatrixXd>& B) {
        return hausdorff(to_vecs(A), to_vecs(B));
      },
      py::arg("A"), py::arg("B"));

  // ---- synthetic data and file io -----------------------------------------
  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("n", &SynthParams::n)
      .def_readwrite("radius", &SynthParams::radius)
      .def_readwrite("offset", &SynthParams::offset)
      .def_readwrite("angle_deg", &SynthParams::angle_deg)
      .def_readwrite("axis", &SynthParams::axis)
      .def_readwrite("bump_height", &SynthParams::bump_height)
      .def_readwrite("bump_sigma", &SynthParams::bump_sigma)
      .def_readwrite("bump_dir", &SynthParams::bump_dir)
      .def_readwrite("semi_axes", &SynthParams::semi_axes)
      .def_readwrite("hole_area_fraction", &SynthParams::hole_area_fraction)
      .def_readwrite("gt_times", &SynthParams::gt_times)
      .def_readwrite("gt_subdiv", &SynthParams::gt_subdiv)
      .def_readwrite("with_normals", &SynthParams::with_normals);

  py::class_<SyntheticData>(m, "SyntheticData")
      .def_readonly("P0", &SyntheticData::P0)
      .def_readonly("P1", &SyntheticData::P1)
      .def_readonly("C", &SyntheticData::C)
      .def_readonly("gt_times", &SyntheticData::gt_times)
      .def_readonly("gt_meshes", &SyntheticData::gt_meshes);
  m.def("make_synthetic", &make_synthetic, py::arg("kind"), py::arg("params") = SynthParams{},
        py::arg("seed") = 1);

  m.def("load_point_cloud", &load_point_cloud, py::arg("path"));
  m.def("save_point_cloud_xyz", &save_point_cloud_xyz, py::arg("path"), py::arg("cloud"));
  m.def("load_mesh_obj", &load_mesh_obj, py::arg("path"));
  m.def("save_mesh_obj", &save_mesh_obj, py::arg("path"), py::arg("mesh"));
  m.def("load_correspondences", &load_correspondences, py::arg("path"));
  m.def("save_correspondences", &save_correspondences, py::arg("path"), py::arg("C"));
}
