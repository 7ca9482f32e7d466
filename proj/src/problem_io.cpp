#include "tl1/problem_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tl1 {

namespace {

constexpr char kMagic[8] = {'T', 'L', '1', 'P', 'R', 'B', '1', '\n'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("problem file truncated");
  return v;
}

}  // namespace

void save_problem(const Problem& prob, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(os, 1);
  write_pod<std::uint32_t>(os, prob.truth ? 1u : 0u);
  const std::uint64_t m = static_cast<std::uint64_t>(prob.a.rows());
  const std::uint64_t n = static_cast<std::uint64_t>(prob.a.cols());
  write_pod(os, m);
  write_pod(os, n);
  for (std::uint64_t i = 0; i < m; ++i)
    for (std::uint64_t j = 0; j < n; ++j) write_pod(os, prob.a(i, j));
  for (std::uint64_t i = 0; i < m; ++i) write_pod(os, prob.y[i]);
  if (prob.truth) {
    for (std::uint64_t j = 0; j < n; ++j) write_pod(os, prob.truth->x[j]);
    write_pod<std::uint64_t>(os, prob.truth->support.size());
    for (int idx : prob.truth->support)
      write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(idx));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Problem load_problem(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + ": not a TL1PRB1 problem file");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1)
    throw std::runtime_error(path + ": unsupported problem version");
  const auto flags = read_pod<std::uint32_t>(is);
  const auto m = read_pod<std::uint64_t>(is);
  const auto n = read_pod<std::uint64_t>(is);
  if (m == 0 || n == 0 || m > (1u << 20) || n > (1u << 20))
    throw std::runtime_error(path + ": implausible dimensions");
  Problem prob;
  prob.a.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::uint64_t i = 0; i < m; ++i)
    for (std::uint64_t j = 0; j < n; ++j) prob.a(i, j) = read_pod<double>(is);
  prob.y.resize(static_cast<Eigen::Index>(m));
  for (std::uint64_t i = 0; i < m; ++i) prob.y[i] = read_pod<double>(is);
  if (flags & 1u) {
    Truth t;
    t.x.resize(static_cast<Eigen::Index>(n));
    for (std::uint64_t j = 0; j < n; ++j) t.x[j] = read_pod<double>(is);
    const auto count = read_pod<std::uint64_t>(is);
    if (count > n) throw std::runtime_error(path + ": bad support size");
    t.support.resize(count);
    for (auto& idx : t.support) {
      const auto v = read_pod<std::uint64_t>(is);
      if (v >= n) throw std::runtime_error(path + ": support index range");
      idx = static_cast<int>(v);
    }
    prob.truth = std::move(t);
  }
  return prob;
}

namespace {

void write_row(std::ostream& os, const double* v, Eigen::Index count) {
  char buf[32];
  for (Eigen::Index j = 0; j < count; ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[j]);
    os << buf << (j + 1 < count ? "," : "\n");
  }
}

}  // namespace

void save_problem_csv(const Problem& prob, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "# tl1 problem dump, m=" << prob.a.rows() << " n=" << prob.a.cols()
     << "\n# A (row-major)\n";
  std::vector<double> row(static_cast<std::size_t>(prob.a.cols()));
  for (Eigen::Index i = 0; i < prob.a.rows(); ++i) {
    for (Eigen::Index j = 0; j < prob.a.cols(); ++j)
      row[static_cast<std::size_t>(j)] = prob.a(i, j);
    write_row(os, row.data(), prob.a.cols());
  }
  os << "# y\n";
  write_row(os, prob.y.data(), prob.y.size());
  if (prob.truth) {
    os << "# x_true\n";
    write_row(os, prob.truth->x.data(), prob.truth->x.size());
    os << "# support (0-based)\n";
    for (std::size_t i = 0; i < prob.truth->support.size(); ++i)
      os << prob.truth->support[i]
         << (i + 1 < prob.truth->support.size() ? "," : "\n");
  }
}

void save_vector(const Vector& x, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[32];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", x[i]);
    os << buf << "\n";
  }
}

Vector load_vector(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<double> vals;
  double v;
  while (is >> v) vals.push_back(v);
  if (!is.eof()) throw std::runtime_error(path + ": malformed vector file");
  Vector x(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    x[static_cast<Eigen::Index>(i)] = vals[i];
  return x;
}

}  // namespace tl1
