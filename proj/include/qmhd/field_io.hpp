#pragma once

/*! \file
 *  \brief Text formats: legacy VTK structured points, flat CSV, boundary CSV, key = value manifests.
 *
 *  Every real is printed with 17 significant digits so a write/read cycle is lossless.
 */

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qmhd/grid.hpp"

namespace qmhd {

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

template <class Rows>
void read_indexed_csv(const std::string& path, const char* header, Rows& rows) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind(header, 0) != 0) throw std::runtime_error(path + ": unexpected CSV header");
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto p = split_csv(line);
    if (p.size() != 5) throw std::runtime_error(path + ": expected 5 columns");
    const std::size_t idx = std::stoul(p[0]);
    if (idx != expected || idx >= rows.size()) throw std::runtime_error(path + ": rows out of order");
    rows[idx] = Quaternion{std::stod(p[1]), std::stod(p[2]), std::stod(p[3]), std::stod(p[4])};
    ++expected;
  }
  if (expected != rows.size()) throw std::runtime_error(path + ": row count does not match domain");
}

}  // namespace detail

/// Legacy ASCII VTK, one 4-component point-data array (s, v1, v2, v3) at the cell centres.
inline void write_vtk(const std::string& path, const QField& u, const std::string& name = "q") {
  const auto& d = u.domain();
  auto out = detail::open_out(path);
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << d.n(0) << ' ' << d.n(1) << ' ' << d.n(2) << '\n';
  const Vec3 c0 = d.center(0, 0, 0);
  out << "ORIGIN " << detail::fmt17(c0[0]) << ' ' << detail::fmt17(c0[1]) << ' ' << detail::fmt17(c0[2]) << '\n';
  out << "SPACING " << detail::fmt17(d.h()) << ' ' << detail::fmt17(d.h()) << ' ' << detail::fmt17(d.h()) << '\n';
  out << "POINT_DATA " << d.size() << '\n';
  out << "SCALARS " << name << " double 4\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& q = u[i];
    out << detail::fmt17(q.s) << ' ' << detail::fmt17(q.v1) << ' ' << detail::fmt17(q.v2) << ' ' << detail::fmt17(q.v3)
        << '\n';
  }
}

/// Reads a file written by write_vtk and rebuilds its domain.
inline QField read_vtk(const std::string& path) {
  auto in = detail::open_in(path);
  std::string line, word;
  Index3 n{};
  Vec3 c0{};
  double h = 0.0;
  std::size_t count = 0;
  bool data = false;
  while (!data && in >> word) {
    if (word == "DIMENSIONS") {
      in >> n[0] >> n[1] >> n[2];
    } else if (word == "ORIGIN") {
      in >> c0[0] >> c0[1] >> c0[2];
    } else if (word == "SPACING") {
      double h2, h3;
      in >> h >> h2 >> h3;
    } else if (word == "POINT_DATA") {
      in >> count;
    } else if (word == "LOOKUP_TABLE") {
      in >> word;
      data = true;
    }
  }
  if (!data || h <= 0.0) throw std::runtime_error(path + ": not a qmhd VTK file");
  const Vec3 origin{c0[0] - 0.5 * h, c0[1] - 0.5 * h, c0[2] - 0.5 * h};
  auto d = std::make_shared<const VoxelDomain>(origin, n, h);
  if (count != d->size()) throw std::runtime_error(path + ": point count does not match dimensions");
  QField u(d);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(in >> u[i].s >> u[i].v1 >> u[i].v2 >> u[i].v3)) throw std::runtime_error(path + ": truncated data");
  return u;
}

inline void write_csv(const std::string& path, const QField& u) {
  auto out = detail::open_out(path);
  out << "cell,s,v1,v2,v3\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& q = u[i];
    out << i << ',' << detail::fmt17(q.s) << ',' << detail::fmt17(q.v1) << ',' << detail::fmt17(q.v2) << ','
        << detail::fmt17(q.v3) << '\n';
  }
}

inline QField read_csv(const std::string& path, const DomainPtr& d) {
  QField u(d);
  auto values = u.values();
  detail::read_indexed_csv(path, "cell,", values);
  return u;
}

inline void write_boundary_csv(const std::string& path, const BoundaryData& g) {
  auto out = detail::open_out(path);
  out << "face,s,v1,v2,v3\n";
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const auto& q = g.values[i];
    out << i << ',' << detail::fmt17(q.s) << ',' << detail::fmt17(q.v1) << ',' << detail::fmt17(q.v2) << ','
        << detail::fmt17(q.v3) << '\n';
  }
}

inline BoundaryData read_boundary_csv(const std::string& path, const DomainPtr& d) {
  BoundaryData g(d);
  detail::read_indexed_csv(path, "face,", g.values);
  return g;
}

using Manifest = std::map<std::string, std::string>;

inline void write_manifest(const std::string& path, const Manifest& m) {
  auto out = detail::open_out(path);
  for (const auto& [k, v] : m) out << k << " = " << v << '\n';
}

inline Manifest read_manifest(const std::string& path) {
  auto in = detail::open_in(path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    m[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return m;
}

}  // namespace qmhd
