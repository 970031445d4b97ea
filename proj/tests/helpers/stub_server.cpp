// Line-oriented JSON test server for exercising the model bridge.
//
// Reads requests {"id","input","prefix"} one per line and answers
// {"id","summary"} with summary "sum <id> batch <n>" where <n> is the number
// of requests that had already arrived (in the same linger window) when the
// batch was collected — this makes client-side concurrency observable.
//
// Modes / flags:
//   --tcp             listen on an ephemeral 127.0.0.1 port; print
//                     "PORT <port>" on stdout, serve one connection
//   --linger-ms N     after the first request of a batch, keep collecting
//                     requests for N ms before answering (default 0)
//   --delay-ms N      sleep N ms before each response
//   --drop-id ID      never answer the request with this id
//   --malformed       emit one non-JSON line instead of the first response
//   --unknown-id      answer the first request with a fabricated id
//   --die-after N     exit after sending N responses
#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace {

struct Options {
  bool tcp = false;
  int linger_ms = 0;
  int delay_ms = 0;
  std::string drop_id;
  bool malformed = false;
  bool unknown_id = false;
  long die_after = -1;
};

Options parse_args(int argc, char** argv) {
  Options o;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "stub_server: %s needs a value\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--tcp") {
      o.tcp = true;
    } else if (arg == "--linger-ms") {
      o.linger_ms = std::atoi(value().c_str());
    } else if (arg == "--delay-ms") {
      o.delay_ms = std::atoi(value().c_str());
    } else if (arg == "--drop-id") {
      o.drop_id = value();
    } else if (arg == "--malformed") {
      o.malformed = true;
    } else if (arg == "--unknown-id") {
      o.unknown_id = true;
    } else if (arg == "--die-after") {
      o.die_after = std::atol(value().c_str());
    } else {
      std::fprintf(stderr, "stub_server: unknown flag %s\n", arg.c_str());
      std::exit(2);
    }
  }
  return o;
}

int listen_tcp() {
  const int server = socket(AF_INET, SOCK_STREAM, 0);
  if (server < 0) { std::perror("socket"); std::exit(2); }
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    std::perror("bind");
    std::exit(2);
  }
  socklen_t len = sizeof(addr);
  if (getsockname(server, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
    std::perror("getsockname");
    std::exit(2);
  }
  // Listen before announcing the port: once "PORT" is out, a client may
  // connect immediately, and the backlog must already be able to hold it.
  if (listen(server, 1) < 0) { std::perror("listen"); std::exit(2); }
  std::printf("PORT %d\n", ntohs(addr.sin_port));
  std::fflush(stdout);
  const int conn = accept(server, nullptr, nullptr);
  if (conn < 0) { std::perror("accept"); std::exit(2); }
  close(server);
  return conn;
}

// Waits up to timeout_ms for data; returns false on EOF with empty buffer.
bool pump(int fd, std::string& buffer, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  const int rc = poll(&p, 1, timeout_ms);
  if (rc <= 0) return true;  // timeout: nothing new, not EOF
  char chunk[4096];
  const ssize_t n = read(fd, chunk, sizeof(chunk));
  if (n <= 0) return false;
  buffer.append(chunk, static_cast<std::size_t>(n));
  return true;
}

std::vector<std::string> take_lines(std::string& buffer) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
    lines.push_back(buffer.substr(start, nl - start));
  }
  buffer.erase(0, start);
  return lines;
}

}  // namespace

int main(int argc, char** argv) {
  const Options opt = parse_args(argc, argv);
  const int in_fd = opt.tcp ? listen_tcp() : STDIN_FILENO;
  const int out_fd = opt.tcp ? in_fd : STDOUT_FILENO;

  std::string buffer;
  long sent = 0;
  bool first_response = true;
  bool open = true;
  while (open) {
    open = pump(in_fd, buffer, 10'000);
    std::vector<std::string> batch = take_lines(buffer);
    if (batch.empty()) {
      if (!open) break;
      continue;
    }
    if (opt.linger_ms > 0) {
      // Collect whatever else the client is willing to send concurrently.
      const auto deadline =
          std::chrono::steady_clock::now() + std::chrono::milliseconds(opt.linger_ms);
      while (std::chrono::steady_clock::now() < deadline) {
        if (!pump(in_fd, buffer, 5)) { open = false; break; }
        for (std::string& extra : take_lines(buffer)) batch.push_back(std::move(extra));
      }
    }
    for (const std::string& line : batch) {
      nlohmann::json request;
      try {
        request = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        std::fprintf(stderr, "stub_server: unparseable request line\n");
        return 2;
      }
      std::string id = request.value("id", "");
      if (!opt.drop_id.empty() && id == opt.drop_id) continue;
      if (opt.delay_ms > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(opt.delay_ms));
      }
      std::string payload;
      if (opt.malformed && first_response) {
        payload = "this is not json\n";
      } else {
        if (opt.unknown_id && first_response) id = "stub-unknown-id";
        nlohmann::json response = {
            {"id", id},
            {"summary", "sum " + id + " batch " + std::to_string(batch.size())}};
        payload = response.dump() + "\n";
      }
      first_response = false;
      std::size_t off = 0;
      while (off < payload.size()) {
        const ssize_t n = write(out_fd, payload.data() + off, payload.size() - off);
        if (n <= 0) return 2;
        off += static_cast<std::size_t>(n);
      }
      ++sent;
      if (opt.die_after >= 0 && sent >= opt.die_after) return 0;
    }
  }
  return 0;
}
