#include "qtf/count_matrix.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qtf {

JointCountMatrix JointCountMatrix::zeros(int d_a, int d_b, std::string basis_a,
                                         std::string basis_b) {
  JointCountMatrix m;
  m.d_a = d_a;
  m.d_b = d_b;
  m.counts.assign(static_cast<std::size_t>(d_a) * d_b, 0);
  m.basis_a = std::move(basis_a);
  m.basis_b = std::move(basis_b);
  return m;
}

std::uint64_t JointCountMatrix::total() const {
  std::uint64_t t = 0;
  for (std::uint64_t c : counts) t += c;
  return t;
}

Eigen::MatrixXd normalize(const JointCountMatrix& m) {
  const std::uint64_t total = m.total();
  if (total == 0) throw std::runtime_error("normalize: all-zero count matrix");
  Eigen::MatrixXd p(m.d_a, m.d_b);
  for (int i = 0; i < m.d_a; ++i)
    for (int j = 0; j < m.d_b; ++j)
      p(i, j) = static_cast<double>(m.at(i, j)) / static_cast<double>(total);
  return p;
}

JointCountMatrix subspace(const JointCountMatrix& m, int d, int offset) {
  if (d <= 0 || offset < 0 || offset + d > m.d_a || offset + d > m.d_b)
    throw std::out_of_range("subspace: block [" + std::to_string(offset) + ", " +
                            std::to_string(offset + d) + ") out of range");
  JointCountMatrix out = JointCountMatrix::zeros(d, d, m.basis_a, m.basis_b);
  out.acquisition_seconds = m.acquisition_seconds;
  out.meta = m.meta;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.at(i, j) = m.at(offset + i, offset + j);
  return out;
}

void write_matrix_csv(const JointCountMatrix& m, std::ostream& out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", m.acquisition_seconds);
  out << "# basis_a=" << m.basis_a << " basis_b=" << m.basis_b << " d_a=" << m.d_a
      << " d_b=" << m.d_b << " acquisition_seconds=" << buf << "\n#";
  for (const auto& [k, v] : m.meta) out << ' ' << k << '=' << v;
  out << "\n";
  for (int i = 0; i < m.d_a; ++i) {
    for (int j = 0; j < m.d_b; ++j) {
      if (j) out << ',';
      out << m.at(i, j);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("matrix CSV write failed");
}

void write_matrix_csv_file(const JointCountMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_matrix_csv(m, out);
}

namespace {

void parse_header_line(const std::string& line, std::map<std::string, std::string>& kv) {
  std::istringstream iss(line.substr(1));
  std::string token;
  while (iss >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) kv[token.substr(0, eq)] = token.substr(eq + 1);
  }
}

}  // namespace

JointCountMatrix read_matrix_csv(std::istream& in) {
  std::string line1, line2;
  if (!std::getline(in, line1) || line1.empty() || line1[0] != '#')
    throw std::runtime_error("matrix CSV: missing header line 1");
  if (!std::getline(in, line2) || line2.empty() || line2[0] != '#')
    throw std::runtime_error("matrix CSV: missing header line 2");

  std::map<std::string, std::string> head;
  parse_header_line(line1, head);
  JointCountMatrix m;
  m.basis_a = head.count("basis_a") ? head["basis_a"] : "time";
  m.basis_b = head.count("basis_b") ? head["basis_b"] : "time";
  m.d_a = head.count("d_a") ? std::stoi(head["d_a"]) : 0;
  m.d_b = head.count("d_b") ? std::stoi(head["d_b"]) : 0;
  m.acquisition_seconds =
      head.count("acquisition_seconds") ? std::stod(head["acquisition_seconds"]) : 0.0;
  parse_header_line(line2, m.meta);

  std::string row;
  while (std::getline(in, row)) {
    if (row.empty()) continue;
    std::istringstream iss(row);
    std::string cell;
    int cols = 0;
    while (std::getline(iss, cell, ',')) {
      m.counts.push_back(std::stoull(cell));
      ++cols;
    }
    if (m.d_b == 0) m.d_b = cols;
    if (cols != m.d_b) throw std::runtime_error("matrix CSV: ragged row");
  }
  if (m.d_b > 0 && m.counts.size() % m.d_b == 0)
    m.d_a = static_cast<int>(m.counts.size() / m.d_b);
  if (m.d_a <= 0 || m.d_b <= 0 ||
      m.counts.size() != static_cast<std::size_t>(m.d_a) * m.d_b)
    throw std::runtime_error("matrix CSV: dimension mismatch");
  return m;
}

JointCountMatrix read_matrix_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix_csv(in);
}

}  // namespace qtf
