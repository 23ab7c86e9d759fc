#include "tcp_loopback.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>

#include "edgewear/error.hpp"

namespace edgewear::cli {

namespace {

[[noreturn]] void fail(const char* what) { throw Error(std::string("tcp loopback: ") + what + ": " + std::strerror(errno)); }

}  // namespace

LoopbackPipe::LoopbackPipe(uint16_t port) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) fail("socket");
  int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(listener);
    fail("bind");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listener, 1) < 0) {
    ::close(listener);
    fail("listen");
  }
  device_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (device_fd_ < 0 || ::connect(device_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(listener);
    fail("connect");
  }
  edge_fd_ = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (edge_fd_ < 0) fail("accept");
  ::setsockopt(device_fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  ::setsockopt(edge_fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

LoopbackPipe::~LoopbackPipe() {
  if (device_fd_ >= 0) ::close(device_fd_);
  if (edge_fd_ >= 0) ::close(edge_fd_);
}

std::vector<uint8_t> LoopbackPipe::carry(const std::vector<uint8_t>& bytes, netsim::Direction dir) {
  const int src = dir == netsim::Direction::device_to_edge ? device_fd_ : edge_fd_;
  const int dst = dir == netsim::Direction::device_to_edge ? edge_fd_ : device_fd_;
  std::vector<uint8_t> out(bytes.size());
  std::size_t sent = 0, got = 0;
  // Interleave so frames larger than the socket buffer cannot deadlock.
  while (got < bytes.size()) {
    if (sent < bytes.size()) {
      const auto n = ::send(src, bytes.data() + sent, bytes.size() - sent, MSG_DONTWAIT | MSG_NOSIGNAL);
      if (n > 0) {
        sent += static_cast<std::size_t>(n);
      } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
        fail("send");
      }
    }
    const auto n = ::recv(dst, out.data() + got, out.size() - got, sent < bytes.size() ? MSG_DONTWAIT : 0);
    if (n > 0) {
      got += static_cast<std::size_t>(n);
    } else if (n == 0) {
      throw Error("tcp loopback: peer closed");
    } else if (errno != EAGAIN && errno != EWOULDBLOCK) {
      fail("recv");
    }
  }
  return out;
}

}  // namespace edgewear::cli
