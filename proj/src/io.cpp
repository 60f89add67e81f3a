#include "ddec/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ddec::io {

namespace {

constexpr int kFormatVersion = 1;

void expect(std::istream& is, const std::string& tok) {
  std::string got;
  if (!(is >> got) || got != tok)
    throw std::runtime_error("parse error: expected '" + tok + "', got '" + got + "'");
}

template <typename T>
T read_value(std::istream& is) {
  T v;
  if (!(is >> v)) throw std::runtime_error("parse error: value expected");
  return v;
}

void write_header(std::ostream& os, const std::string& kind) {
  os << "ddec format_version " << kFormatVersion << "\nkind " << kind << "\n";
}

void read_header(std::istream& is, const std::string& kind) {
  expect(is, "ddec");
  expect(is, "format_version");
  const int v = read_value<int>(is);
  if (v != kFormatVersion)
    throw std::runtime_error("unsupported format_version " + std::to_string(v));
  expect(is, "kind");
  expect(is, kind);
}

void write_vector(std::ostream& os, const std::string& name, const Eigen::VectorXd& v) {
  os << name << " " << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) os << " " << format_double(v[i]);
  os << "\n";
}

Eigen::VectorXd read_vector(std::istream& is, const std::string& name) {
  expect(is, name);
  const Eigen::Index n = read_value<Eigen::Index>(is);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = read_value<double>(is);
  return v;
}

void write_incidence(std::ostream& os, const std::string& name, const IncidenceMatrix& m) {
  os << name << " " << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  for (int j = 0; j < m.outerSize(); ++j)
    for (IncidenceMatrix::InnerIterator it(m, j); it; ++it)
      os << it.row() << " " << it.col() << " " << it.value() << "\n";
}

IncidenceMatrix read_incidence(std::istream& is, const std::string& name) {
  expect(is, name);
  const Eigen::Index rows = read_value<Eigen::Index>(is);
  const Eigen::Index cols = read_value<Eigen::Index>(is);
  const Eigen::Index nnz = read_value<Eigen::Index>(is);
  std::vector<Eigen::Triplet<int>> trips;
  trips.reserve(static_cast<size_t>(nnz));
  for (Eigen::Index i = 0; i < nnz; ++i) {
    const Eigen::Index r = read_value<Eigen::Index>(is);
    const Eigen::Index c = read_value<Eigen::Index>(is);
    const int v = read_value<int>(is);
    trips.emplace_back(r, c, v);
  }
  IncidenceMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void write_complex_body(std::ostream& os, const ChainComplex& c) {
  os << "dim " << c.dim << "\ncounts";
  for (Eigen::Index n : c.counts) os << " " << n;
  os << "\npositions " << c.positions.size() << "\n";
  for (const auto& p : c.positions)
    os << format_double(p.x()) << " " << format_double(p.y()) << "\n";
  for (size_t k = 0; k < c.delta.size(); ++k)
    write_incidence(os, "delta" + std::to_string(k), c.delta[k]);
}

ChainComplex read_complex_body(std::istream& is) {
  ChainComplex c;
  expect(is, "dim");
  c.dim = read_value<int>(is);
  expect(is, "counts");
  c.counts.resize(static_cast<size_t>(c.dim) + 1);
  for (auto& n : c.counts) n = read_value<Eigen::Index>(is);
  expect(is, "positions");
  const Eigen::Index np = read_value<Eigen::Index>(is);
  c.positions.resize(static_cast<size_t>(np));
  for (auto& p : c.positions) {
    p.x() = read_value<double>(is);
    p.y() = read_value<double>(is);
  }
  c.delta.resize(static_cast<size_t>(c.dim));
  for (size_t k = 0; k < c.delta.size(); ++k)
    c.delta[k] = read_incidence(is, "delta" + std::to_string(k));
  validate(c);
  return c;
}

void write_bcs(std::ostream& os, const std::vector<BoundaryCondition>& bcs,
               const std::optional<BoundaryCondition>& pin) {
  os << "bcs " << bcs.size() << "\n";
  for (const auto& bc : bcs)
    os << bc.level << " " << bc.index << " " << format_double(bc.value) << "\n";
  if (pin)
    os << "pin 1 " << pin->level << " " << pin->index << " " << format_double(pin->value) << "\n";
  else
    os << "pin 0\n";
}

void read_bcs(std::istream& is, std::vector<BoundaryCondition>& bcs,
              std::optional<BoundaryCondition>& pin) {
  expect(is, "bcs");
  const Eigen::Index n = read_value<Eigen::Index>(is);
  bcs.resize(static_cast<size_t>(n));
  for (auto& bc : bcs) {
    bc.level = read_value<int>(is);
    bc.index = read_value<Eigen::Index>(is);
    bc.value = read_value<double>(is);
  }
  expect(is, "pin");
  if (read_value<int>(is) != 0) {
    BoundaryCondition p;
    p.level = read_value<int>(is);
    p.index = read_value<Eigen::Index>(is);
    p.value = read_value<double>(is);
    pin = p;
  } else {
    pin.reset();
  }
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string content_hash(const std::string& content) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : content) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_complex(std::ostream& os, const ChainComplex& c) {
  write_header(os, "complex");
  write_complex_body(os, c);
  os << "end\n";
}

ChainComplex read_complex(std::istream& is) {
  read_header(is, "complex");
  ChainComplex c = read_complex_body(is);
  expect(is, "end");
  return c;
}

void write_coarse(std::ostream& os, const CoarseComplex& cc) {
  write_header(os, "coarsening");
  os << "labels " << cc.map.labels.size();
  for (int l : cc.map.labels) os << " " << l;
  os << "\n";
  for (size_t k = 0; k < cc.map.iota.size(); ++k)
    write_incidence(os, "iota" + std::to_string(k), cc.map.iota[k]);
  os << "centroids " << cc.map.centroids.size() << "\n";
  for (const auto& p : cc.map.centroids)
    os << format_double(p.x()) << " " << format_double(p.y()) << "\n";
  os << "n_interface_edges " << cc.n_interface_edges << "\n";
  os << "n_boundary_edges " << cc.n_boundary_edges << "\n";
  write_complex_body(os, cc.coarse);
  os << "end\n";
}

CoarseComplex read_coarse(std::istream& is) {
  read_header(is, "coarsening");
  CoarseComplex cc;
  expect(is, "labels");
  const Eigen::Index nl = read_value<Eigen::Index>(is);
  cc.map.labels.resize(static_cast<size_t>(nl));
  for (auto& l : cc.map.labels) l = read_value<int>(is);
  cc.map.iota.resize(3);
  for (size_t k = 0; k < cc.map.iota.size(); ++k)
    cc.map.iota[k] = read_incidence(is, "iota" + std::to_string(k));
  expect(is, "centroids");
  const Eigen::Index nc = read_value<Eigen::Index>(is);
  cc.map.centroids.resize(static_cast<size_t>(nc));
  for (auto& p : cc.map.centroids) {
    p.x() = read_value<double>(is);
    p.y() = read_value<double>(is);
  }
  expect(is, "n_interface_edges");
  cc.n_interface_edges = read_value<Eigen::Index>(is);
  expect(is, "n_boundary_edges");
  cc.n_boundary_edges = read_value<Eigen::Index>(is);
  cc.coarse = read_complex_body(is);
  expect(is, "end");
  return cc;
}

void write_model(std::ostream& os, const SurrogateModel& mo) {
  write_header(os, "model");
  os << "k " << mo.k << "\nepsilon " << format_double(mo.epsilon) << "\n";
  write_complex_body(os, mo.complex);
  for (size_t k = 0; k < mo.metric.logB.size(); ++k)
    write_vector(os, "logB" + std::to_string(k), mo.metric.logB[k]);
  for (size_t k = 0; k < mo.metric.logD.size(); ++k)
    write_vector(os, "logD" + std::to_string(k), mo.metric.logD[k]);
  os << "net " << mo.net.layers.size() << " " << activation_to_string(mo.net.activation) << " "
     << format_double(mo.net.prelu_alpha) << "\n";
  for (const auto& layer : mo.net.layers) {
    os << "layer " << layer.W.rows() << " " << layer.W.cols() << "\n";
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
        if (c) os << " ";
        os << format_double(layer.W(r, c));
      }
      os << "\n";
    }
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
      if (r) os << " ";
      os << format_double(layer.b[r]);
    }
    os << "\n";
  }
  write_bcs(os, mo.bcs, mo.pin);
  write_vector(os, "source", mo.source.values);
  os << "end\n";
}

SurrogateModel read_model(std::istream& is) {
  read_header(is, "model");
  SurrogateModel mo;
  expect(is, "k");
  mo.k = read_value<int>(is);
  expect(is, "epsilon");
  mo.epsilon = read_value<double>(is);
  mo.complex = read_complex_body(is);
  mo.metric.logB.resize(static_cast<size_t>(mo.complex.dim) + 1);
  mo.metric.logD.resize(static_cast<size_t>(mo.complex.dim) + 1);
  for (size_t k = 0; k < mo.metric.logB.size(); ++k)
    mo.metric.logB[k] = read_vector(is, "logB" + std::to_string(k));
  for (size_t k = 0; k < mo.metric.logD.size(); ++k)
    mo.metric.logD[k] = read_vector(is, "logD" + std::to_string(k));
  expect(is, "net");
  const Eigen::Index nlayers = read_value<Eigen::Index>(is);
  mo.net.activation = activation_from_string(read_value<std::string>(is));
  mo.net.prelu_alpha = read_value<double>(is);
  mo.net.layers.resize(static_cast<size_t>(nlayers));
  for (auto& layer : mo.net.layers) {
    expect(is, "layer");
    const Eigen::Index rows = read_value<Eigen::Index>(is);
    const Eigen::Index cols = read_value<Eigen::Index>(is);
    layer.W.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.W(r, c) = read_value<double>(is);
    layer.b.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) layer.b[r] = read_value<double>(is);
  }
  read_bcs(is, mo.bcs, mo.pin);
  mo.source.level = mo.k;
  mo.source.values = read_vector(is, "source");
  expect(is, "end");
  return mo;
}

void write_sample(std::ostream& os, const Sample& s, int k, const std::string& complex_hash) {
  write_header(os, "sample");
  os << "complex_hash " << complex_hash << "\nk " << k << "\n";
  write_bcs(os, s.bcs, s.pin);
  write_vector(os, "f", s.f.values);
  os << "mask " << s.mask.size();
  for (Eigen::Index i : s.mask) os << " " << i;
  os << "\n";
  write_vector(os, "data", s.data);
  os << "end\n";
}

Sample read_sample(std::istream& is, int& k, std::string& complex_hash) {
  read_header(is, "sample");
  expect(is, "complex_hash");
  complex_hash = read_value<std::string>(is);
  expect(is, "k");
  k = read_value<int>(is);
  Sample s;
  read_bcs(is, s.bcs, s.pin);
  s.f.level = k;
  s.f.values = read_vector(is, "f");
  expect(is, "mask");
  const Eigen::Index nm = read_value<Eigen::Index>(is);
  s.mask.resize(static_cast<size_t>(nm));
  for (auto& i : s.mask) i = read_value<Eigen::Index>(is);
  s.data = read_vector(is, "data");
  expect(is, "end");
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

ChainComplex load_complex(const std::string& path) {
  std::istringstream is(slurp(path));
  return read_complex(is);
}

CoarseComplex load_coarse(const std::string& path) {
  std::istringstream is(slurp(path));
  return read_coarse(is);
}

SurrogateModel load_model(const std::string& path) {
  std::istringstream is(slurp(path));
  return read_model(is);
}

Sample load_sample(const std::string& path, int& k, std::string& complex_hash) {
  std::istringstream is(slurp(path));
  return read_sample(is, k, complex_hash);
}

void save_complex(const std::string& path, const ChainComplex& c) {
  std::ostringstream os;
  write_complex(os, c);
  spit(path, os.str());
}

void save_coarse(const std::string& path, const CoarseComplex& cc) {
  std::ostringstream os;
  write_coarse(os, cc);
  spit(path, os.str());
}

void save_model(const std::string& path, const SurrogateModel& mo) {
  std::ostringstream os;
  write_model(os, mo);
  spit(path, os.str());
}

void save_sample(const std::string& path, const Sample& s, int k, const std::string& complex_hash) {
  std::ostringstream os;
  write_sample(os, s, k, complex_hash);
  spit(path, os.str());
}

} // namespace ddec::io
