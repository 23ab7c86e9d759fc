#pragma once

#include <mutex>
#include <string>
#include <vector>

namespace edgewear::netsim {

struct TransportRecord {
  std::string name;
  std::string kind;  // "in-process" or "tcp-loopback"
  std::string endpoint_a;
  std::string endpoint_b;
};

/// Inventory of every transport opened during a run. Components that open a
/// link register it here; tests assert on the contents.
class TransportRegistry {
 public:
  void open(TransportRecord r);
  std::vector<TransportRecord> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<TransportRecord> records_;
};

/// True if every transport connects exactly the two named peers.
bool only_between(const std::vector<TransportRecord>& records, const std::string& a, const std::string& b);

}  // namespace edgewear::netsim
