// Copyright (c) 2026 The stsvlcc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stsvlcc/external_scorer.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <chrono>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>
#include <sodium.h>

namespace stsvlcc {

std::string Base64Encode(std::span<const std::uint8_t> bytes) {
  constexpr int kVariant = sodium_base64_VARIANT_ORIGINAL;
  const std::size_t len = sodium_base64_ENCODED_LEN(bytes.size(), kVariant);
  std::string out(len, '\0');
  const unsigned char empty = 0;
  sodium_bin2base64(out.data(), len, bytes.empty() ? &empty : bytes.data(), bytes.size(),
                    kVariant);
  out.resize(len - 1);  // drop the terminator
  return out;
}

std::vector<std::uint8_t> Base64Decode(std::string_view text) {
  std::vector<std::uint8_t> out(text.size() / 4 * 3 + 3);
  std::size_t len = 0;
  const char *end = nullptr;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                        sodium_base64_VARIANT_ORIGINAL) != 0 ||
      end != text.data() + text.size())
    throw Error(ErrorCode::kProtocolError, "invalid base64 input");
  out.resize(len);
  return out;
}

std::string EncodeScoreRequest(const PromptChunk &chunk, const std::string &id) {
  nlohmann::json msg;
  msg["id"] = id;
  msg["question"] = chunk.question;
  msg["answer"] = chunk.answer;
  msg["transcript_window"] = chunk.transcript_window;
  const auto d = chunk.fused ? chunk.fused->rows() : 0;
  msg["d"] = d;
  nlohmann::json frames = nlohmann::json::array();
  if (chunk.fused) {
    for (Eigen::Index f = 0; f < chunk.fused->cols(); ++f) {
      Eigen::VectorXf col = chunk.fused->col(f).cast<float>();
      frames.push_back(Base64Encode(std::span<const std::uint8_t>(
          reinterpret_cast<const std::uint8_t *>(col.data()),
          sizeof(float) * static_cast<std::size_t>(col.size()))));
    }
  }
  msg["fused"] = std::move(frames);
  return msg.dump();
}

double DecodeScoreResponse(std::string_view line, const std::string &expected_id) {
  nlohmann::json msg = nlohmann::json::parse(line, nullptr, false);
  if (msg.is_discarded() || !msg.is_object())
    throw Error(ErrorCode::kProtocolError, "response is not a JSON object");
  auto id = msg.find("id");
  if (id == msg.end() || !id->is_string() || id->get<std::string>() != expected_id)
    throw Error(ErrorCode::kProtocolError,
                "response id does not match request '" + expected_id + "'");
  auto p = msg.find("p_yes");
  if (p == msg.end() || !p->is_number())
    throw Error(ErrorCode::kProtocolError, "response lacks numeric p_yes");
  const double value = p->get<double>();
  if (!(value > 0.0 && value < 1.0))
    throw Error(ErrorCode::kProtocolError,
                "p_yes " + std::to_string(value) + " outside (0, 1)");
  return value;
}

namespace {

int ConnectTcp(const std::string &host_port) {
  auto colon = host_port.rfind(':');
  if (colon == std::string::npos)
    throw Error(ErrorCode::kInvalidArgument, "tcp endpoint needs host:port");
  std::string host = host_port.substr(0, colon);
  std::string port = host_port.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  if (int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
    throw Error(ErrorCode::kTransportError,
                "cannot resolve '" + host_port + "': " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0)
    throw Error(ErrorCode::kTransportError, "cannot connect to '" + host_port + "'");
  return fd;
}

}  // namespace

ExternalScorer::ExternalScorer(const std::string &endpoint, double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
  if (endpoint.rfind("tcp://", 0) == 0) {
    fd_ = ConnectTcp(endpoint.substr(6));
    return;
  }
  if (endpoint.rfind("exec:", 0) != 0)
    throw Error(ErrorCode::kInvalidArgument,
                "endpoint must be tcp://host:port or exec:<command>");
  const std::string command = endpoint.substr(5);
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0)
    throw Error(ErrorCode::kTransportError, std::string("socketpair: ") + std::strerror(errno));
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw Error(ErrorCode::kTransportError, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::close(sv[0]);
    ::close(sv[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char *>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(sv[1]);
  fd_ = sv[0];
  child_pid_ = pid;
}

ExternalScorer::~ExternalScorer() {
  if (fd_ >= 0) ::close(fd_);
  if (child_pid_ > 0) {
    // Closing the channel is the shutdown signal; escalate if ignored.
    int status = 0;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(child_pid_, &status, WNOHANG) == child_pid_) {
        ::kill(-child_pid_, SIGKILL);  // stragglers in the child's group
        return;
      }
      ::usleep(10000);
    }
    ::kill(-child_pid_, SIGKILL);
    ::waitpid(child_pid_, &status, 0);
  }
}

void ExternalScorer::SendLine(const std::string &line) const {
  std::string payload = line + "\n";
  std::size_t sent = 0;
  while (sent < payload.size()) {
    ssize_t n = ::send(fd_, payload.data() + sent, payload.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      broken_ = true;
      throw Error(ErrorCode::kTransportError,
                  std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string ExternalScorer::ReadLine() const {
  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(timeout_seconds_));
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (remaining.count() <= 0) {
      broken_ = true;
      throw Error(ErrorCode::kTimeout, "no response from external scorer");
    }
    pollfd pfd{fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;  // deadline check above
    char chunk[4096];
    ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      broken_ = true;
      throw Error(ErrorCode::kTransportError, "external scorer closed the channel");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

double ExternalScorer::Score(const PromptChunk &chunk) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (broken_)
    throw Error(ErrorCode::kTransportError, "channel unusable after earlier failure");
  const std::string id = chunk.qa_id + "/" + std::to_string(chunk.answer_index) + "/" +
                         std::to_string(chunk.chunk_index) + "#" +
                         std::to_string(counter_++);
  SendLine(EncodeScoreRequest(chunk, id));
  return DecodeScoreResponse(ReadLine(), id);
}

}  // namespace stsvlcc
