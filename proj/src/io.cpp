#include "softmax_newton/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace smn {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_matrix(const std::string& path, const MatrixXd& m) {
  auto out = open_out(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << fmt(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

MatrixXd read_matrix(const std::string& path) {
  auto in = open_in(path);
  Index n = 0, d = 0;
  if (!(in >> n >> d) || n < 0 || d < 0)
    throw IoError("bad matrix header in " + path);
  MatrixXd m(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j)
      if (!(in >> m(i, j))) throw IoError("truncated matrix in " + path);
  return m;
}

void write_vector(const std::string& path, const VectorXd& v) {
  auto out = open_out(path);
  out << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) out << fmt(v[i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

VectorXd read_vector(const std::string& path) {
  auto in = open_in(path);
  Index n = 0;
  if (!(in >> n) || n < 0) throw IoError("bad vector header in " + path);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i)
    if (!(in >> v[i])) throw IoError("truncated vector in " + path);
  return v;
}

void write_sparse_diagonal(const std::string& path, const SparseDiagonal& sd) {
  auto out = open_out(path);
  out << sd.n << ' ' << sd.nnz() << '\n';
  for (const auto& [idx, wgt] : sd.entries)
    out << idx << ' ' << fmt(wgt) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

SparseDiagonal read_sparse_diagonal(const std::string& path) {
  auto in = open_in(path);
  SparseDiagonal sd;
  Index nnz = 0;
  if (!(in >> sd.n >> nnz) || sd.n < 0 || nnz < 0 || nnz > sd.n)
    throw IoError("bad sparse-diagonal header in " + path);
  sd.entries.resize(nnz);
  for (auto& [idx, wgt] : sd.entries)
    if (!(in >> idx >> wgt)) throw IoError("truncated sparse diagonal in " + path);
  return sd;
}

void write_meta(const std::string& path,
                const std::map<std::string, std::string>& kv) {
  auto out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out) throw IoError("write failed: " + path);
}

std::map<std::string, std::string> read_meta(const std::string& path) {
  auto in = open_in(path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("bad meta line in " + path + ": " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void write_bundle(const std::string& dir, const Bundle& bundle) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  write_matrix((base / "A.mat").string(), bundle.instance.A);
  write_vector((base / "b.vec").string(), bundle.instance.b);
  write_vector((base / "w.vec").string(), bundle.instance.w);
  write_meta((base / "meta").string(),
             {{"l", fmt(bundle.l)},
              {"R", fmt(bundle.R)},
              {"seed", std::to_string(bundle.seed)}});
  if (bundle.x_star) write_vector((base / "xstar.vec").string(), *bundle.x_star);
}

void write_trace_csv(const std::string& path, const SolverTrace& trace) {
  auto out = open_out(path);
  out << "iter,loss,grad_norm,step_norm,r,contraction,nnz,ms\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
  for (const auto& rec : trace.iterations) {
    out << rec.iter << ',' << fmt(rec.loss) << ',' << fmt(rec.grad_norm) << ','
        << cell(rec.step_norm) << ',' << cell(rec.r) << ','
        << cell(rec.contraction) << ',' << rec.nnz << ',' << cell(rec.ms)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Bundle read_bundle(const std::string& dir) {
  const std::filesystem::path base(dir);
  Bundle bundle;
  bundle.instance.A = read_matrix((base / "A.mat").string());
  bundle.instance.b = read_vector((base / "b.vec").string());
  bundle.instance.w = read_vector((base / "w.vec").string());
  const auto meta = read_meta((base / "meta").string());
  if (auto it = meta.find("l"); it != meta.end()) bundle.l = std::stod(it->second);
  if (auto it = meta.find("R"); it != meta.end()) bundle.R = std::stod(it->second);
  if (auto it = meta.find("seed"); it != meta.end())
    bundle.seed = std::stoull(it->second);
  if (std::filesystem::exists(base / "xstar.vec"))
    bundle.x_star = read_vector((base / "xstar.vec").string());
  return bundle;
}

}  // namespace smn
