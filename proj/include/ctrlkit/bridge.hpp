#pragma once

// Client side of the summarizer wire protocol: newline-delimited JSON
// requests over a child process's standard streams or a TCP socket, plus a
// deterministic in-process mock so the whole pipeline runs offline.
//
// Request line:  {"id": str, "input": str, "prefix": str}
// Response line: {"id": str, "summary": str}

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstddef>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "ctrlkit/text.hpp"
#include "ctrlkit/util.hpp"

namespace ctrlkit {

// Endpoint or protocol failure; the CLI maps this to its own exit code so
// callers can tell bad input from a bad server.
class BridgeError : public std::runtime_error {
 public:
  explicit BridgeError(const std::string& message) : std::runtime_error(message) {}
};

struct SummarizeRequest {
  std::string id;
  std::string encoder_text;
  std::string decoder_prefix;
};

struct SummarizeResponse {
  std::string id;
  std::string summary;
};

struct Endpoint {
  enum class Kind { mock, command, tcp };
  Kind kind = Kind::mock;
  std::string command;  // shell command line, Kind::command
  std::string host;     // Kind::tcp
  std::string port;
};

// Accepts "mock", "cmd:<shell command>", or "tcp:<host>:<port>".
inline Endpoint parse_endpoint(const std::string& text) {
  Endpoint ep;
  if (text == "mock") {
    ep.kind = Endpoint::Kind::mock;
    return ep;
  }
  if (text.rfind("cmd:", 0) == 0) {
    ep.kind = Endpoint::Kind::command;
    ep.command = text.substr(4);
    if (ep.command.empty()) throw std::invalid_argument("endpoint: empty command");
    return ep;
  }
  if (text.rfind("tcp:", 0) == 0) {
    const std::string rest = text.substr(4);
    const std::size_t colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw std::invalid_argument("endpoint: expected tcp:<host>:<port>, got \"" + text + "\"");
    }
    ep.kind = Endpoint::Kind::tcp;
    ep.host = rest.substr(0, colon);
    ep.port = rest.substr(colon + 1);
    return ep;
  }
  throw std::invalid_argument("endpoint: expected mock, cmd:..., or tcp:host:port, got \"" +
                              text + "\"");
}

struct MockConfig {
  std::string separator = "=>";
  std::size_t max_sentences = 3;
};

// Deterministic stand-in for the neural model: splits the input at the first
// separator occurrence, treats the tokens before it (minus "|") as keywords,
// and returns the top sentences by keyword-token hit count in document order.
// No keywords means plain lead-N. A non-empty decoder prefix is prepended.
inline SummarizeResponse mock_summarize(const SummarizeRequest& request,
                                        const MockConfig& cfg = {}) {
  const std::size_t sep_pos = request.encoder_text.find(cfg.separator);
  if (sep_pos == std::string::npos) {
    throw std::invalid_argument("mock_summarize: request \"" + request.id +
                                "\" has no \"" + cfg.separator + "\" separator");
  }
  const std::string control = request.encoder_text.substr(0, sep_pos);
  const std::string source = request.encoder_text.substr(sep_pos + cfg.separator.size());

  std::unordered_set<std::string> keywords;
  for (const Token& token : tokenize(control)) {
    if (token.surface != "|") keywords.insert(token.lower);
  }

  const TokenSequence doc = tokenize(source);
  const std::vector<Sentence> sentences = split_sentences(doc);

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (!keywords.empty()) {
    std::vector<std::size_t> hits(sentences.size(), 0);
    for (const Sentence& s : sentences) {
      for (std::size_t t = s.token_start; t < s.token_end; ++t) {
        if (keywords.count(doc[t].lower)) ++hits[s.index];
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return hits[a] > hits[b];  // ties keep document order
    });
  }

  std::vector<std::size_t> chosen(order.begin(),
                                  order.begin() + std::min(cfg.max_sentences, order.size()));
  std::sort(chosen.begin(), chosen.end());

  std::vector<std::string> parts;
  parts.reserve(chosen.size());
  for (const std::size_t idx : chosen) {
    const Sentence& s = sentences[idx];
    parts.push_back(span_text(source, doc, s.token_start, s.token_end));
  }
  std::string text = join(parts, " ");

  SummarizeResponse response;
  response.id = request.id;
  response.summary = request.decoder_prefix.empty() ? std::move(text)
                                                    : request.decoder_prefix + " " + text;
  return response;
}

namespace detail {

inline void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
    throw BridgeError(std::string("fcntl: ") + std::strerror(errno));
  }
}

// One duplex byte stream: a child process's stdin/stdout or a socket.
struct Connection {
  int write_fd = -1;
  int read_fd = -1;
  pid_t child = -1;

  Connection() = default;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;
  Connection(Connection&& other) noexcept
      : write_fd(other.write_fd), read_fd(other.read_fd), child(other.child) {
    other.write_fd = -1;
    other.read_fd = -1;
    other.child = -1;
  }

  ~Connection() {
    if (write_fd >= 0) ::close(write_fd);
    if (read_fd >= 0 && read_fd != write_fd) ::close(read_fd);
    if (child > 0) {
      int status = 0;
      // Give the child a moment to exit after EOF, then insist. The child
      // leads its own process group (see open_command), so signal the whole
      // group: the shell may have forked once more for the actual command,
      // and a surviving grandchild would hold our caller's pipes open.
      for (int i = 0; i < 20; ++i) {
        if (waitpid(child, &status, WNOHANG) != 0) return;
        usleep(100 * 1000);
      }
      kill(-child, SIGTERM);
      for (int i = 0; i < 5; ++i) {
        if (waitpid(child, &status, WNOHANG) != 0) return;
        usleep(100 * 1000);
      }
      kill(-child, SIGKILL);
      waitpid(child, &status, 0);
    }
  }

  void close_write() {
    if (write_fd >= 0) {
      if (read_fd == write_fd) {
        ::shutdown(write_fd, SHUT_WR);
      } else {
        ::close(write_fd);
        write_fd = -1;
      }
    }
  }
};

inline Connection open_command(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) < 0 || pipe(from_child) < 0) {
    throw BridgeError(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    throw BridgeError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    setpgid(0, 0);  // own group, so teardown can signal every descendant
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // mirror the child's call; whichever runs first wins
  ::close(to_child[0]);
  ::close(from_child[1]);
  Connection conn;
  conn.write_fd = to_child[1];
  conn.read_fd = from_child[0];
  conn.child = pid;
  set_nonblocking(conn.write_fd);
  set_nonblocking(conn.read_fd);
  return conn;
}

inline Connection open_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const int rc = getaddrinfo(host.c_str(), port.c_str(), &hints, &result);
  if (rc != 0) {
    throw BridgeError("cannot resolve " + host + ":" + port + ": " + gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
    fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(result);
  if (fd < 0) {
    throw BridgeError("cannot connect to " + host + ":" + port + ": " + last_error);
  }
  Connection conn;
  conn.write_fd = fd;
  conn.read_fd = fd;
  set_nonblocking(fd);
  return conn;
}

}  // namespace detail

// Sends every request and returns the responses reordered to match the
// request order. At most max_in_flight requests are outstanding at once.
// timeout_s is an inactivity bound: it trips only when no byte moves in
// either direction for that long, and the error names the unanswered ids.
inline std::vector<SummarizeResponse> summarize_batch(
    const Endpoint& endpoint, const std::vector<SummarizeRequest>& requests,
    std::size_t max_in_flight = 8, double timeout_s = 30.0, const MockConfig& mock_cfg = {}) {
  if (max_in_flight == 0) {
    throw std::invalid_argument("summarize_batch: max_in_flight must be positive");
  }
  {
    std::unordered_set<std::string> ids;
    for (const SummarizeRequest& request : requests) {
      if (!ids.insert(request.id).second) {
        throw std::invalid_argument("summarize_batch: duplicate request id \"" + request.id +
                                    "\"");
      }
    }
  }
  if (requests.empty()) return {};

  if (endpoint.kind == Endpoint::Kind::mock) {
    std::vector<SummarizeResponse> responses;
    responses.reserve(requests.size());
    for (const SummarizeRequest& request : requests) {
      responses.push_back(mock_summarize(request, mock_cfg));
    }
    return responses;
  }

  // A peer that dies mid-batch must surface as a BridgeError, not SIGPIPE.
  static const bool sigpipe_ignored = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  detail::Connection conn = endpoint.kind == Endpoint::Kind::command
                                ? detail::open_command(endpoint.command)
                                : detail::open_tcp(endpoint.host, endpoint.port);

  std::unordered_map<std::string, std::size_t> slot;  // id -> index in requests
  slot.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) slot.emplace(requests[i].id, i);

  std::vector<SummarizeResponse> responses(requests.size());
  std::vector<bool> answered(requests.size(), false);
  std::size_t next_to_send = 0;
  std::size_t sent = 0;
  std::size_t received = 0;
  std::string out_buffer;
  std::string in_buffer;

  const auto pending_ids = [&]() {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < sent; ++i) {
      if (!answered[i]) ids.push_back(requests[i].id);
    }
    for (std::size_t i = next_to_send; i < requests.size(); ++i) ids.push_back(requests[i].id);
    return ids;
  };

  auto last_progress = std::chrono::steady_clock::now();
  while (received < requests.size()) {
    // Refill the outgoing buffer up to the in-flight cap.
    while (out_buffer.size() < 1 << 16 && next_to_send < requests.size() &&
           sent - received < max_in_flight) {
      const SummarizeRequest& request = requests[next_to_send];
      nlohmann::json line = {{"id", request.id},
                             {"input", request.encoder_text},
                             {"prefix", request.decoder_prefix}};
      out_buffer += line.dump();
      out_buffer += '\n';
      ++next_to_send;
      ++sent;
    }

    pollfd fds[2];
    nfds_t nfds = 0;
    pollfd* read_slot = nullptr;
    pollfd* write_slot = nullptr;
    fds[nfds] = {conn.read_fd, POLLIN, 0};
    read_slot = &fds[nfds++];
    if (!out_buffer.empty() && conn.write_fd >= 0) {
      fds[nfds] = {conn.write_fd, POLLOUT, 0};
      write_slot = &fds[nfds++];
    }

    const auto waited = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      last_progress)
                            .count();
    const double remaining = timeout_s - waited;
    if (remaining <= 0.0) {
      throw BridgeError("summarize_batch: no activity for " + std::to_string(timeout_s) +
                        "s; unanswered ids: " + join(pending_ids(), ", "));
    }
    const int rc = poll(fds, nfds, static_cast<int>(remaining * 1000.0) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) continue;  // timeout check happens on the next pass

    if (write_slot != nullptr && (write_slot->revents & (POLLOUT | POLLERR | POLLHUP)) != 0) {
      const ssize_t n = write(conn.write_fd, out_buffer.data(), out_buffer.size());
      if (n < 0) {
        if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          throw BridgeError(std::string("write to endpoint failed: ") + std::strerror(errno) +
                            "; unanswered ids: " + join(pending_ids(), ", "));
        }
      } else if (n > 0) {
        out_buffer.erase(0, static_cast<std::size_t>(n));
        last_progress = std::chrono::steady_clock::now();
      }
    }

    if ((read_slot->revents & (POLLIN | POLLERR | POLLHUP)) != 0) {
      char chunk[4096];
      const ssize_t n = read(conn.read_fd, chunk, sizeof chunk);
      if (n < 0) {
        if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
          throw BridgeError(std::string("read from endpoint failed: ") + std::strerror(errno));
        }
        continue;
      }
      if (n == 0) {
        throw BridgeError("endpoint closed the connection; unanswered ids: " +
                          join(pending_ids(), ", "));
      }
      last_progress = std::chrono::steady_clock::now();
      in_buffer.append(chunk, static_cast<std::size_t>(n));

      std::size_t newline;
      while ((newline = in_buffer.find('\n')) != std::string::npos) {
        std::string line = in_buffer.substr(0, newline);
        in_buffer.erase(0, newline + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        nlohmann::json parsed;
        try {
          parsed = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
          throw BridgeError("malformed response line: " + line);
        }
        if (!parsed.is_object() || !parsed.contains("id") || !parsed["id"].is_string() ||
            !parsed.contains("summary") || !parsed["summary"].is_string()) {
          throw BridgeError("malformed response line: " + line);
        }
        const std::string id = parsed["id"].get<std::string>();
        const auto it = slot.find(id);
        if (it == slot.end()) {
          throw BridgeError("response for unknown id \"" + id + "\"");
        }
        if (answered[it->second]) {
          throw BridgeError("duplicate response for id \"" + id + "\"");
        }
        answered[it->second] = true;
        responses[it->second] = SummarizeResponse{id, parsed["summary"].get<std::string>()};
        ++received;
      }
    }

    if (next_to_send == requests.size() && out_buffer.empty() && conn.write_fd >= 0 &&
        conn.write_fd != conn.read_fd) {
      conn.close_write();  // EOF tells a stream server no more requests are coming
    }
  }

  return responses;
}

inline std::vector<SummarizeResponse> summarize_batch(const std::string& endpoint,
                                                      const std::vector<SummarizeRequest>& requests,
                                                      std::size_t max_in_flight = 8,
                                                      double timeout_s = 30.0,
                                                      const MockConfig& mock_cfg = {}) {
  return summarize_batch(parse_endpoint(endpoint), requests, max_in_flight, timeout_s, mock_cfg);
}

}  // namespace ctrlkit
