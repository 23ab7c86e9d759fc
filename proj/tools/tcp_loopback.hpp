#pragma once

#include <cstdint>
#include <vector>

#include "edgewear/netsim/channel.hpp"

namespace edgewear::cli {

/// A connected pair of TCP sockets on 127.0.0.1. Frames are written on one
/// end and read back from the other, so every byte crosses the kernel's
/// loopback interface.
class LoopbackPipe {
 public:
  /// port 0 picks an ephemeral port. Throws edgewear::Error on socket failures.
  explicit LoopbackPipe(uint16_t port);
  ~LoopbackPipe();
  LoopbackPipe(const LoopbackPipe&) = delete;
  LoopbackPipe& operator=(const LoopbackPipe&) = delete;

  uint16_t port() const { return port_; }
  std::vector<uint8_t> carry(const std::vector<uint8_t>& bytes, netsim::Direction dir);

 private:
  int device_fd_ = -1;
  int edge_fd_ = -1;
  uint16_t port_ = 0;
};

}  // namespace edgewear::cli
