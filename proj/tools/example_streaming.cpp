// Streams the synthetic device workload through the default pipeline and
// prints the top explanations of each emission.

#include <iomanip>
#include <iostream>

#include "fastdata/fastdata.hpp"

int main() {
  using namespace fastdata;

  QuerySpec spec;
  spec.query_id = "devices";
  spec.mode = QueryMode::Streaming;
  spec.source.kind = SourceKind::SyntheticDevices;
  spec.source.devices.n_points = 200000;
  spec.decay_period = {DecayPeriod::Kind::Tuples, 50000};
  spec.emit_every_tuples = 50000;
  spec.random_seed = 7;

  for (const auto& report : run_streaming(spec)) {
    std::cout << "emission " << report.emission << ": " << report.points_processed << " points, "
              << report.outlier_count << " outliers\n";
    std::size_t shown = 0;
    for (const auto& e : report.explanations) {
      if (shown++ == 3) break;
      std::cout << "  ";
      for (const auto& [name, value] : e.attributes) std::cout << name << '=' << value << ' ';
      std::cout << "support " << std::setprecision(3) << e.outlier_support << ", risk ratio " << e.risk_ratio << '\n';
    }
  }
}
