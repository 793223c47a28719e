#pragma once
// Trace serialization. The CSV layout is a stable external interface:
// t,omega,freq,v,p,q,theta,p_ref_effective,p_load_effective with %.{precision}g
// values, so identical traces serialize to identical bytes.
#include <cstdio>
#include <fstream>
#include <string>

#include "gfm/errors.hpp"
#include "gfm/simulate.hpp"

namespace gfm {

inline void write_trace_csv(const std::string& path, const Trace& tr, int precision = 9) {
  if (precision < 3 || precision > 17) throw Error("csv precision must be in [3, 17]");
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  out << "t,omega,freq,v,p,q,theta,p_ref_effective,p_load_effective\n";
  char buf[64];
  auto cell = [&](double value, char sep) {
    std::snprintf(buf, sizeof buf, "%.*g%c", precision, value, sep);
    out << buf;
  };
  for (std::size_t k = 0; k < tr.size(); ++k) {
    cell(tr.t[k], ',');
    cell(tr.omega[k], ',');
    cell(tr.freq[k], ',');
    cell(tr.v[k], ',');
    cell(tr.p[k], ',');
    cell(tr.q[k], ',');
    cell(tr.theta[k], ',');
    cell(tr.p_ref_effective[k], ',');
    cell(tr.p_load_effective[k], '\n');
  }
  if (!out) throw Error("failed while writing trace file: " + path);
}

}  // namespace gfm
