#include "ddec/cli.hpp"

#include "ddec/io.hpp"
#include "ddec/reference.hpp"
#include "ddec/solve.hpp"
#include "ddec/train.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace ddec {

namespace {

namespace fs = std::filesystem;

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1p-53) - 1.0;
  return v;
}

struct Manifest {
  std::string case_name;
  int k = 2;
  std::string coarse_file, coarse_hash;
  std::vector<std::string> sample_files;
  std::vector<std::string> sample_hashes;
  std::vector<double> alphas;
};

void write_manifest(const std::string& path, const Manifest& m) {
  std::ostringstream os;
  os << "ddec format_version 1\nkind manifest\ncase " << m.case_name << "\nk " << m.k
     << "\ncoarse " << m.coarse_file << " " << m.coarse_hash << "\nsamples "
     << m.sample_files.size() << "\n";
  for (size_t i = 0; i < m.sample_files.size(); ++i)
    os << m.sample_files[i] << " " << m.sample_hashes[i] << " alpha "
       << io::format_double(m.alphas[i]) << "\n";
  os << "end\n";
  io::spit(path, os.str());
}

Manifest read_manifest(const std::string& path) {
  std::istringstream is(io::slurp(path));
  auto expect = [&is](const std::string& tok) {
    std::string got;
    if (!(is >> got) || got != tok)
      throw std::runtime_error("manifest parse error: expected '" + tok + "'");
  };
  expect("ddec");
  expect("format_version");
  int v;
  is >> v;
  if (v != 1) throw std::runtime_error("unsupported manifest version");
  expect("kind");
  expect("manifest");
  Manifest m;
  expect("case");
  is >> m.case_name;
  expect("k");
  is >> m.k;
  expect("coarse");
  is >> m.coarse_file >> m.coarse_hash;
  expect("samples");
  size_t n;
  is >> n;
  m.sample_files.resize(n);
  m.sample_hashes.resize(n);
  m.alphas.resize(n);
  for (size_t i = 0; i < n; ++i) {
    is >> m.sample_files[i] >> m.sample_hashes[i];
    expect("alpha");
    is >> m.alphas[i];
  }
  expect("end");
  return m;
}

int cmd_generate(const std::string& case_name, int fine, int parts, std::vector<double> alphas,
                 const std::string& out_dir) {
  if (!fs::is_directory(out_dir)) {
    std::cerr << "error: output directory does not exist: " << out_dir << "\n";
    return 2;
  }
  CaseSpec spec;
  spec.tag = case_from_string(case_name);
  spec.fine_n = fine;
  spec.px = spec.py = parts;
  spec.alphas = alphas.empty() ? default_alphas(spec.tag) : alphas;
  const Dataset ds = generate_dataset(spec);

  Manifest m;
  m.case_name = case_name;
  m.k = ds.k;
  m.alphas = ds.alphas;
  {
    std::ostringstream os;
    io::write_coarse(os, ds.cc);
    m.coarse_file = "coarse.txt";
    m.coarse_hash = io::content_hash(os.str());
    io::spit((fs::path(out_dir) / m.coarse_file).string(), os.str());
  }
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    std::ostringstream os;
    io::write_sample(os, ds.samples[i], ds.k, m.coarse_hash);
    const std::string name = "sample_" + std::to_string(i) + ".txt";
    m.sample_files.push_back(name);
    m.sample_hashes.push_back(io::content_hash(os.str()));
    io::spit((fs::path(out_dir) / name).string(), os.str());
  }
  write_manifest((fs::path(out_dir) / "manifest.txt").string(), m);
  std::cout << "wrote " << ds.samples.size() << " sample(s) to " << out_dir << "\n";
  return 0;
}

int cmd_coarsen(const std::string& complex_file, int px, int py, int parts, std::uint64_t seed,
                const std::string& out_file) {
  const ChainComplex fine = io::load_complex(complex_file);
  std::vector<int> labels;
  if (parts > 0) {
    labels = greedy_partition(fine, parts, seed);
  } else {
    // block partitioning needs the Cartesian grid shape; infer nx from the
    // x-edge block of a complex built by build_cartesian_complex
    int nx = 0, ny = 0;
    for (int n = 1; n <= static_cast<int>(fine.count(2)); ++n)
      if (fine.count(2) % n == 0) {
        const int m2 = static_cast<int>(fine.count(2)) / n;
        if (static_cast<Eigen::Index>(n + 1) * (m2 + 1) == fine.count(0) &&
            cartesian_x_edge_count(n, m2) + static_cast<Eigen::Index>(m2) * (n + 1) ==
                fine.count(1)) {
          nx = n;
          ny = m2;
          break;
        }
      }
    if (nx == 0) {
      std::cerr << "error: complex is not a Cartesian grid; use --parts\n";
      return 2;
    }
    labels = block_partition(fine, nx, ny, px, py);
  }
  const CoarseComplex cc = build_coarse(fine, labels);
  const CoarseReport rep = verify_coarse(cc, fine);
  io::save_coarse(out_file, cc);
  std::cout << "coarse cells " << cc.coarse.count(2) << ", edges " << cc.coarse.count(1)
            << ", nodes " << cc.coarse.count(0) << (rep.pass ? " (verified)" : " (CHECK FAILED)")
            << "\n";
  return rep.pass ? 0 : 1;
}

std::pair<CoarseComplex, std::vector<Sample>> load_dataset(const std::string& data_dir,
                                                           Manifest& m) {
  m = read_manifest((fs::path(data_dir) / "manifest.txt").string());
  const std::string coarse_path = (fs::path(data_dir) / m.coarse_file).string();
  const std::string content = io::slurp(coarse_path);
  if (io::content_hash(content) != m.coarse_hash)
    throw std::runtime_error("coarse complex hash mismatch: " + coarse_path);
  std::istringstream is(content);
  CoarseComplex cc = io::read_coarse(is);
  std::vector<Sample> samples;
  for (const auto& f : m.sample_files) {
    int k = 0;
    std::string hash;
    samples.push_back(io::load_sample((fs::path(data_dir) / f).string(), k, hash));
    if (k != m.k) throw std::runtime_error("sample level mismatch: " + f);
    if (hash != m.coarse_hash) throw std::runtime_error("sample references a different complex: " + f);
  }
  return {std::move(cc), std::move(samples)};
}

int cmd_train(const std::string& data_dir, const TrainConfig& cfg, double epsilon,
              const std::string& activation, std::vector<Eigen::Index> hidden,
              const std::string& model_out, const std::string& history_out) {
  Manifest m;
  auto [cc, samples] = load_dataset(data_dir, m);

  Dataset ds;
  ds.cc = std::move(cc);
  ds.k = m.k;
  ds.samples = std::move(samples);
  SurrogateModel mo =
      initial_model(ds, activation_from_string(activation), hidden, epsilon, cfg.seed);

  const TrainResult res = train(mo, ds.samples, cfg);
  io::save_model(model_out, res.model);
  if (!history_out.empty()) {
    std::ostringstream os;
    write_history_csv(os, res.history);
    io::spit(history_out, os.str());
  }
  std::cout << "final max per-sample loss " << io::format_double(res.final_max_loss) << "\n";
  if (cfg.loss_target > 0.0 && !res.reached_target) return 3;
  return 0;
}

int cmd_solve(const std::string& model_file, const std::string& sample_file,
              const std::string& state_out, const std::string& coarse_file,
              const std::string& profile_out, double line_y) {
  SurrogateModel mo = io::load_model(model_file);
  if (!sample_file.empty()) {
    int k = 0;
    std::string hash;
    const Sample s = io::load_sample(sample_file, k, hash);
    if (k != mo.k) throw std::runtime_error("sample/model level mismatch");
    mo.bcs = s.bcs;
    mo.pin = s.pin;
    mo.source = s.f;
  }
  auto [s, rep] = newton_solve(mo, State::zero(mo), default_tolerance(mo));
  if (!rep.converged) {
    std::cerr << "error: Newton did not converge (residual "
              << rep.residual_norms.back() << ")\n";
    return 1;
  }
  std::cout << "converged in " << rep.iterations << " iteration(s), residual "
            << io::format_double(rep.residual_norms.back()) << "\n";
  if (!state_out.empty()) {
    std::ostringstream os;
    os << "ddec format_version 1\nkind state\nk " << mo.k << "\nw " << s.w.values.size();
    for (Eigen::Index i = 0; i < s.w.values.size(); ++i)
      os << " " << io::format_double(s.w.values[i]);
    os << "\nu " << s.u.values.size();
    for (Eigen::Index i = 0; i < s.u.values.size(); ++i)
      os << " " << io::format_double(s.u.values[i]);
    os << "\nend\n";
    io::spit(state_out, os.str());
  }
  if (!profile_out.empty()) {
    if (coarse_file.empty()) {
      std::cerr << "error: --profile requires --coarse for subdomain centroids\n";
      return 2;
    }
    const CoarseComplex cc = io::load_coarse(coarse_file);
    const auto rows = centroid_profile(cc.map.centroids, s.u.values, line_y);
    std::ostringstream os;
    os << "x,value\n";
    for (const auto& [x, v] : rows) os << io::format_double(x) << "," << io::format_double(v) << "\n";
    io::spit(profile_out, os.str());
  }
  return 0;
}

int cmd_verify(const std::string& model_file) {
  const SurrogateModel mo = io::load_model(model_file);
  const VerifyReport rep = verify_model(mo);
  std::cout << "exactness d.d        " << io::format_double(rep.exactness_d) << "\n"
            << "exactness d*.d*      " << io::format_double(rep.exactness_dstar) << "\n"
            << "adjointness          " << io::format_double(rep.adjointness) << "\n"
            << "hodge orthogonality  " << io::format_double(rep.hodge_orthogonality) << "\n"
            << "hodge reconstruction " << io::format_double(rep.hodge_reconstruction) << "\n"
            << "min eigenvalue       " << io::format_double(rep.min_eigenvalue) << "\n"
            << "eps * L_N            " << io::format_double(rep.eps_lipschitz) << "\n"
            << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_export(const std::string& coarse_file, const std::string& state_file,
               const std::string& out_file, double line_y) {
  const CoarseComplex cc = io::load_coarse(coarse_file);
  std::istringstream is(io::slurp(state_file));
  std::string tok;
  int k = 0;
  Eigen::VectorXd w, u;
  is >> tok >> tok;
  int version;
  is >> version >> tok >> tok >> tok >> k >> tok;
  Eigen::Index n;
  is >> n;
  w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) is >> w[i];
  is >> tok >> n;
  u.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) is >> u[i];
  if (!is) throw std::runtime_error("malformed state file: " + state_file);
  const Eigen::VectorXd& field = k == 2 ? u : w;
  const auto& positions = k == 2 ? cc.map.centroids : cc.coarse.positions;
  const auto rows = centroid_profile(positions, field, line_y);
  std::ostringstream os;
  os << "x,value\n";
  for (const auto& [x, v] : rows) os << io::format_double(x) << "," << io::format_double(v) << "\n";
  io::spit(out_file, os.str());
  return 0;
}

} // namespace

VerifyReport verify_model(const SurrogateModel& mo) {
  VerifyReport rep;
  const ChainComplex& c = mo.complex;
  const Metric& m = mo.metric;
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    {
      Cochain x{0, random_vector(rng, c.count(0))};
      const Cochain ddx = apply_d(m, c, 1, apply_d(m, c, 0, x));
      rep.exactness_d = std::max(rep.exactness_d, ddx.values.cwiseAbs().maxCoeff());
    }
    {
      Cochain y{2, random_vector(rng, c.count(2))};
      const Cochain ddy = apply_dstar(m, c, 0, apply_dstar(m, c, 1, y));
      rep.exactness_dstar = std::max(rep.exactness_dstar, ddy.values.cwiseAbs().maxCoeff());
    }
    for (int k = 0; k < c.dim; ++k) {
      Cochain u{k, random_vector(rng, c.count(k))};
      Cochain v{k + 1, random_vector(rng, c.count(k + 1))};
      const double lhs = inner_product(m, k + 1, apply_d(m, c, k, u), v);
      const double rhs = inner_product(m, k, u, apply_dstar(m, c, k, v));
      rep.adjointness =
          std::max(rep.adjointness, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    {
      Cochain u{1, random_vector(rng, c.count(1))};
      const HodgeParts parts = hodge_decompose(m, c, 1, u);
      const double nu = std::max(1.0, norm_k(m, 1, u));
      rep.hodge_reconstruction = std::max(
          rep.hodge_reconstruction,
          (u.values - parts.exact.values - parts.harmonic.values - parts.coexact.values)
                  .cwiseAbs()
                  .maxCoeff() /
              nu);
      rep.hodge_orthogonality = std::max(
          {rep.hodge_orthogonality,
           std::abs(inner_product(m, 1, parts.exact, parts.harmonic)) / (nu * nu),
           std::abs(inner_product(m, 1, parts.exact, parts.coexact)) / (nu * nu),
           std::abs(inner_product(m, 1, parts.harmonic, parts.coexact)) / (nu * nu)});
    }
  }
  {
    const Eigen::ArrayXd sw = m.weight(mo.k).sqrt();
    Eigen::MatrixXd S = sw.matrix().asDiagonal() * hodge_laplacian_matrix(m, c, mo.k) *
                        sw.inverse().matrix().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    rep.min_eigenvalue = es.eigenvalues().minCoeff() /
                         std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  rep.eps_lipschitz = mo.epsilon * lipschitz_bound(mo.net, mo.metric, mo.k);
  rep.pass = rep.exactness_d < 1e-12 && rep.exactness_dstar < 1e-12 &&
             rep.adjointness < 1e-12 && rep.hodge_orthogonality < 1e-10 &&
             rep.hodge_reconstruction < 1e-10 && rep.min_eigenvalue > -1e-10 &&
             (mo.epsilon == 0.0 || rep.eps_lipschitz < 1.0);
  return rep;
}

std::vector<std::pair<double, double>> centroid_profile(
    const std::vector<Eigen::Vector2d>& centroids, const Eigen::VectorXd& values, double y) {
  if (static_cast<Eigen::Index>(centroids.size()) != values.size())
    throw std::invalid_argument("centroid/value count mismatch");
  std::vector<std::pair<double, double>> rows;
  for (size_t i = 0; i < centroids.size(); ++i) {
    const Eigen::Vector2d query(centroids[i].x(), y);
    size_t best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < centroids.size(); ++j) {
      const double d = (centroids[j] - query).norm();
      if (d < bestd) {
        bestd = d;
        best = j;
      }
    }
    if (best == i) rows.emplace_back(centroids[i].x(), values[static_cast<Eigen::Index>(i)]);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"structure-preserving graph surrogate models (data-driven exterior calculus)"};
  app.require_subcommand(1);

  // generate
  std::string g_case = "d1", g_out;
  int g_fine = 20, g_parts = 3;
  std::vector<double> g_alphas;
  auto* gen = app.add_subcommand("generate", "fine solve, coarsen, and write training samples");
  gen->add_option("--case", g_case, "d1 | d2 | magneto");
  gen->add_option("--fine", g_fine, "fine cells per direction");
  gen->add_option("--parts", g_parts, "partition blocks per direction");
  gen->add_option("--alphas", g_alphas, "material/loading parameters");
  gen->add_option("--out", g_out, "output directory")->required();

  // coarsen
  std::string c_complex, c_out;
  int c_px = 3, c_py = 3, c_parts = 0;
  std::uint64_t c_seed = 0;
  auto* coa = app.add_subcommand("coarsen", "build a coarse complex from a fine complex file");
  coa->add_option("--complex", c_complex, "fine complex file")->required();
  coa->add_option("--px", c_px, "blocks in x");
  coa->add_option("--py", c_py, "blocks in y");
  coa->add_option("--parts", c_parts, "use greedy partitioning with this many parts");
  coa->add_option("--seed", c_seed, "greedy partition seed");
  coa->add_option("--out", c_out, "output coarsening file")->required();

  // train
  std::string t_data, t_model = "model.txt", t_history, t_activation = "elu";
  std::vector<Eigen::Index> t_hidden{5, 5};
  double t_epsilon = 0.0;
  TrainConfig t_cfg;
  auto* tr = app.add_subcommand("train", "run the equality-constrained trainer");
  tr->add_option("--data", t_data, "dataset directory (with manifest.txt)")->required();
  tr->add_option("--epochs", t_cfg.epochs, "training epochs");
  tr->add_option("--lr", t_cfg.learning_rate, "Adam learning rate");
  tr->add_option("--epsilon", t_epsilon, "perturbation scale (0 = linear model)");
  tr->add_option("--activation", t_activation, "elu | prelu | tanh | relu");
  tr->add_option("--hidden", t_hidden, "hidden layer widths");
  tr->add_option("--seed", t_cfg.seed, "init seed");
  tr->add_option("--target", t_cfg.loss_target, "stop when max per-sample loss is below");
  tr->add_flag("--warm-start", t_cfg.warm_start, "reuse last epoch's states");
  tr->add_option("--out", t_model, "model output file");
  tr->add_option("--history", t_history, "history CSV output file");

  // solve
  std::string s_model, s_sample, s_state, s_coarse, s_profile;
  double s_line_y = 0.5;
  auto* so = app.add_subcommand("solve", "Newton-solve a model (optionally with sample BCs)");
  so->add_option("--model", s_model, "model file")->required();
  so->add_option("--sample", s_sample, "sample file supplying BCs/source");
  so->add_option("--out", s_state, "state output file");
  so->add_option("--coarse", s_coarse, "coarsening file (for --profile)");
  so->add_option("--profile", s_profile, "profile CSV output file");
  so->add_option("--line-y", s_line_y, "profile line height");

  // verify
  std::string v_model;
  auto* ve = app.add_subcommand("verify", "check structure invariants of a model file");
  ve->add_option("--model", v_model, "model file")->required();

  // export
  std::string e_coarse, e_state, e_out;
  double e_line_y = 0.5;
  auto* ex = app.add_subcommand("export", "profile CSV from a saved state");
  ex->add_option("--coarse", e_coarse, "coarsening file")->required();
  ex->add_option("--state", e_state, "state file from solve")->required();
  ex->add_option("--out", e_out, "profile CSV output file")->required();
  ex->add_option("--line-y", e_line_y, "profile line height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_generate(g_case, g_fine, g_parts, g_alphas, g_out);
    if (coa->parsed()) return cmd_coarsen(c_complex, c_px, c_py, c_parts, c_seed, c_out);
    if (tr->parsed())
      return cmd_train(t_data, t_cfg, t_epsilon, t_activation, t_hidden, t_model, t_history);
    if (so->parsed()) return cmd_solve(s_model, s_sample, s_state, s_coarse, s_profile, s_line_y);
    if (ve->parsed()) return cmd_verify(v_model);
    if (ex->parsed()) return cmd_export(e_coarse, e_state, e_out, e_line_y);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

} // namespace ddec
