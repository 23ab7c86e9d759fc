#include "edgewear/netsim/transport.hpp"

#include <algorithm>

namespace edgewear::netsim {

void TransportRegistry::open(TransportRecord r) {
  std::lock_guard lock(mu_);
  records_.push_back(std::move(r));
}

std::vector<TransportRecord> TransportRegistry::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t TransportRegistry::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

bool only_between(const std::vector<TransportRecord>& records, const std::string& a, const std::string& b) {
  return std::all_of(records.begin(), records.end(), [&](const TransportRecord& r) {
    return (r.endpoint_a == a && r.endpoint_b == b) || (r.endpoint_a == b && r.endpoint_b == a);
  });
}

}  // namespace edgewear::netsim
