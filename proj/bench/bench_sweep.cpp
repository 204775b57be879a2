// Times the OpenMP kernels against their serial references.
//
//   bolusopt_bench [points] [trials]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "bolusopt/solvers.hpp"
#include "bolusopt/verify.hpp"

using namespace bolusopt;

namespace {

template <class F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same(const std::vector<SweepEntry>& a, const std::vector<SweepEntry>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].gamma != b[i].gamma || a[i].t_prime != b[i].t_prime || a[i].error != b[i].error) return false;
  return true;
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-28s serial %8.2f s  parallel %8.2f s  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int points = argc > 1 ? std::atoi(argv[1]) : 16;
  const std::size_t trials = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 40;
  std::printf("threads: %d, sweep points: %d, suite trials: %zu\n", omp_get_max_threads(), points, trials);

  bool ok = true;
  for (const Scenario& sc : {bergman_paper_scenario(), hovorka_paper_scenario()}) {
    const std::string model(model_name(sc.model));
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) grid.push_back(2.0 + 998.0 * i / std::max(1, points - 1));

    std::vector<SweepEntry> ser, par;
    const double ts = seconds([&] { ser = sweep_gamma_serial(sc, SweepParameter::Tau, grid); });
    const double tp = seconds([&] { par = sweep_gamma(sc, SweepParameter::Tau, grid); });
    row((model + " tau sweep").c_str(), ts, tp, same(ser, par));
    ok = ok && same(ser, par);

    SuiteReport rs, rp;
    const double vs = seconds([&] { rs = run_suite_serial(sc, Suite::Intersections, trials, 1); });
    const double vp = seconds([&] { rp = run_suite(sc, Suite::Intersections, trials, 1); });
    const bool eq = suite_report_json(rs) == suite_report_json(rp);
    row((model + " intersections").c_str(), vs, vp, eq);
    ok = ok && eq;
  }
  return ok ? 0 : 1;
}
