// Copyright 2026 The BAM Authors
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

#include "bam/teaching/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <nlohmann/json.hpp>

#include "bam/error.hpp"
#include "bam/grid.hpp"
#include "bam/teaching/session.hpp"

namespace bam::teaching {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using json = nlohmann::json;

namespace {

constexpr std::string_view kPrefix = "/api/v1/";

std::vector<std::string> split_path(std::string_view target) {
  const auto query = target.find('?');
  if (query != std::string_view::npos) target = target.substr(0, query);
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < target.size()) {
    const auto j = target.find('/', i);
    const auto end = j == std::string_view::npos ? target.size() : j;
    if (end > i) parts.emplace_back(target.substr(i, end - i));
    i = end + 1;
  }
  return parts;
}

struct Reply {
  http::status status = http::status::ok;
  std::string content_type = "application/json";
  std::string body;
};

Reply json_error(http::status status, std::string_view reason) {
  return {status, "application/json", error_message(reason, std::nullopt)};
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::random_device device;
  std::lock_guard lock(mutex);
  const std::uint64_t v = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  static const char* const kHex = "0123456789abcdef";
  std::string id(16, '0');
  for (int i = 0; i < 16; ++i) id[15 - i] = kHex[(v >> (4 * i)) & 0xF];
  return id;
}

class Subscriber {
 public:
  virtual ~Subscriber() = default;
  virtual void send(std::string message) = 0;
};

// A session plus its connected streams and agent clock. Every access to
// `session` holds `mutex`, so events for one session apply in order.
struct LiveSession {
  std::mutex mutex;
  std::unique_ptr<Session> session;
  std::vector<std::weak_ptr<Subscriber>> subscribers;
  std::unique_ptr<net::steady_timer> timer;
  bool ticking = false;

  void broadcast_locked(const std::string& message) {
    std::erase_if(subscribers, [](const auto& w) { return w.expired(); });
    for (const auto& w : subscribers) {
      if (auto s = w.lock()) s->send(message);
    }
  }
  std::string snapshot_locked() const {
    return snapshot_message(session->snapshot(), *session->environment().domain);
  }
};

}  // namespace

struct Server::Impl {
  explicit Impl(ServerOptions o) : options(std::move(o)), ioc(std::max(1, options.threads)) {}

  ServerOptions options;
  net::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::vector<std::thread> threads;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;

  std::map<std::string, std::shared_ptr<const Environment>> catalog;
  std::vector<std::string> environment_order;
  Algorithm default_algorithm = Algorithm::kBam;

  std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;

  void load_catalog();
  void load_sessions();
  std::shared_ptr<LiveSession> find(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  Reply handle(http::verb method, std::string_view target, const std::string& body);
  Reply create_session(const std::string& body);
  // Applies one inbound event message. Accepted events broadcast a
  // snapshot to every subscriber; the return value is the snapshot or the
  // rejection.
  std::string apply_message(LiveSession& live, const std::string& text, bool* accepted);
  void maybe_start_clock(const std::shared_ptr<LiveSession>& live);
  void tick(const std::shared_ptr<LiveSession>& live);

  void accept();
};

void Server::Impl::load_catalog() {
  if (!std::filesystem::is_directory(options.environment_dir)) {
    throw ValidationError("environment directory " + options.environment_dir.string() +
                          " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(options.environment_dir)) {
    if (entry.path().extension() == ".env") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto env = std::make_shared<const Environment>(load_environment(f));
    const std::string name = env->domain->spec().name;
    if (catalog.emplace(name, std::move(env)).second) environment_order.push_back(name);
  }
}

void Server::Impl::load_sessions() {
  if (options.data_dir.empty()) return;
  std::filesystem::create_directories(options.data_dir);
  for (const auto& entry : std::filesystem::directory_iterator(options.data_dir)) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "session.json")) continue;
    try {
      auto live = std::make_shared<LiveSession>();
      live->session = Session::resume(entry.path(), catalog);
      sessions.emplace(live->session->info().id, std::move(live));
    } catch (const std::exception& e) {
      std::cerr << "skipping session " << entry.path().filename().string() << ": " << e.what()
                << '\n';
    }
  }
}

Reply Server::Impl::create_session(const std::string& body) {
  json j = json::object();
  if (!body.empty()) {
    try {
      j = json::parse(body);
    } catch (const json::parse_error&) {
      return json_error(http::status::bad_request, "request body is not valid JSON");
    }
  }
  if (!j.is_object() || !j.contains("environment") || !j.at("environment").is_string()) {
    return json_error(http::status::bad_request, "request needs an 'environment' name");
  }
  const auto env = catalog.find(j.at("environment").get<std::string>());
  if (env == catalog.end()) return json_error(http::status::not_found, "unknown environment");
  SessionInfo info;
  info.environment = env->first;
  info.algorithm = default_algorithm;
  try {
    if (j.contains("algorithm")) info.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    info.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>()
                                   : std::random_device{}() * 0x9e3779b97f4a7c15ULL;
  } catch (const std::exception& e) {
    return json_error(http::status::bad_request, e.what());
  }
  auto live = std::make_shared<LiveSession>();
  {
    std::lock_guard lock(sessions_mutex);
    do {
      info.id = new_session_id();
    } while (sessions.count(info.id) != 0);
    const std::filesystem::path dir =
        options.data_dir.empty() ? std::filesystem::path{} : options.data_dir / info.id;
    try {
      live->session = std::make_unique<Session>(info, env->second, dir);
    } catch (const std::exception& e) {
      return json_error(http::status::internal_server_error, e.what());
    }
    sessions.emplace(info.id, live);
  }
  json out;
  out["v"] = kProtocolVersion;
  out["id"] = info.id;
  out["seed"] = info.seed;
  out["stream"] = std::string(kPrefix) + "sessions/" + info.id + "/stream";
  std::lock_guard lock(live->mutex);
  out["snapshot"] = json::parse(live->snapshot_locked());
  return {http::status::created, "application/json", out.dump()};
}

std::string Server::Impl::apply_message(LiveSession& live, const std::string& text,
                                        bool* accepted) {
  *accepted = false;
  std::lock_guard lock(live.mutex);
  SessionEvent event;
  try {
    event = parse_event_message(text, *live.session->environment().domain);
  } catch (const std::exception& e) {
    return error_message(e.what(), std::nullopt);
  }
  if (event.kind == EventKind::kStartAgentEpisode) event.policy_version.reset();
  const ApplyResult r = live.session->apply(event);
  if (!r.accepted) return error_message(r.reason, event.seq);
  *accepted = true;
  const std::string snapshot = live.snapshot_locked();
  live.broadcast_locked(snapshot);
  return snapshot;
}

void Server::Impl::maybe_start_clock(const std::shared_ptr<LiveSession>& live) {
  if (options.tick_ms <= 0) return;
  std::lock_guard lock(live->mutex);
  if (live->ticking || live->session->mode() != Mode::kAgentControl) return;
  if (!live->timer) live->timer = std::make_unique<net::steady_timer>(net::make_strand(ioc));
  live->ticking = true;
  live->timer->expires_after(std::chrono::milliseconds(options.tick_ms));
  live->timer->async_wait([this, live](beast::error_code ec) {
    if (!ec) tick(live);
  });
}

void Server::Impl::tick(const std::shared_ptr<LiveSession>& live) {
  std::lock_guard lock(live->mutex);
  if (live->session->mode() != Mode::kAgentControl) {
    live->ticking = false;
    return;
  }
  SessionEvent event;
  event.kind = EventKind::kAgentTick;
  if (live->session->apply(event).accepted) live->broadcast_locked(live->snapshot_locked());
  if (live->session->mode() != Mode::kAgentControl) {
    live->ticking = false;
    return;
  }
  live->timer->expires_after(std::chrono::milliseconds(options.tick_ms));
  live->timer->async_wait([this, live](beast::error_code ec) {
    if (!ec) tick(live);
  });
}

Reply Server::Impl::handle(http::verb method, std::string_view target, const std::string& body) {
  if (!target.starts_with(kPrefix)) return json_error(http::status::not_found, "not found");
  const auto parts = split_path(target.substr(kPrefix.size()));
  if (parts.empty()) return json_error(http::status::not_found, "not found");

  if (parts[0] == "environments") {
    if (method != http::verb::get) {
      return json_error(http::status::method_not_allowed, "method not allowed");
    }
    if (parts.size() == 1) {
      json list = json::array();
      for (const auto& name : environment_order) {
        const GridSpec& g = catalog.at(name)->domain->spec();
        json tasks = json::array();
        for (const TaskSpec& t : g.tasks) tasks.push_back(t.name);
        list.push_back({{"name", name},
                        {"domain", family_name(g.family)},
                        {"width", g.width},
                        {"height", g.height},
                        {"horizon", g.horizon},
                        {"tasks", tasks}});
      }
      return {http::status::ok, "application/json",
              json{{"v", kProtocolVersion}, {"environments", list}}.dump()};
    }
    if (parts.size() == 2) {
      const auto it = catalog.find(parts[1]);
      if (it == catalog.end()) return json_error(http::status::not_found, "unknown environment");
      return {http::status::ok, "text/plain", serialize_environment(it->second->domain->spec())};
    }
    return json_error(http::status::not_found, "not found");
  }

  if (parts[0] != "sessions") return json_error(http::status::not_found, "not found");
  if (parts.size() == 1) {
    if (method != http::verb::post) {
      return json_error(http::status::method_not_allowed, "method not allowed");
    }
    return create_session(body);
  }
  const auto live = find(parts[1]);
  if (!live) return json_error(http::status::not_found, "unknown session");
  const std::string what = parts.size() == 2 ? "" : parts[2];
  if (parts.size() > 3) return json_error(http::status::not_found, "not found");

  if (what == "events") {
    if (method != http::verb::post) {
      return json_error(http::status::method_not_allowed, "method not allowed");
    }
    bool accepted = false;
    std::string reply = apply_message(*live, body, &accepted);
    if (accepted) maybe_start_clock(live);
    return {accepted ? http::status::ok : http::status::conflict, "application/json",
            std::move(reply)};
  }
  if (method != http::verb::get) {
    return json_error(http::status::method_not_allowed, "method not allowed");
  }
  std::lock_guard lock(live->mutex);
  const Session& s = *live->session;
  if (what.empty()) return {http::status::ok, "application/json", live->snapshot_locked()};
  if (what == "log") {
    std::string out;
    for (std::size_t i = 0; i < s.log().size(); ++i) {
      out += log_line(s.log()[i], static_cast<long>(i));
      out += '\n';
    }
    return {http::status::ok, "application/x-ndjson", std::move(out)};
  }
  if (what == "dataset") return {http::status::ok, "text/plain", dataset_to_string(s.dataset())};
  if (what == "checkpoint") return {http::status::ok, "text/plain", s.checkpoint_text()};
  return json_error(http::status::not_found, "not found");
}

namespace {

class WsConnection : public Subscriber, public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, std::shared_ptr<LiveSession> live, Server::Impl& server)
      : ws_(std::move(socket)), live_(std::move(live)), server_(server) {}

  void accept(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      {
        std::lock_guard lock(self->live_->mutex);
        self->live_->subscribers.push_back(self);
        self->send(self->live_->snapshot_locked());
      }
      self->read();
    });
  }

  void send(std::string message) override {
    net::post(ws_.get_executor(), [self = shared_from_this(), m = std::move(message)]() mutable {
      self->outbox_.push_back(std::move(m));
      if (self->outbox_.size() == 1) self->write();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      bool accepted = false;
      std::string reply = self->server_.apply_message(*self->live_, text, &accepted);
      if (accepted) {
        self->server_.maybe_start_clock(self->live_);
      } else {
        self->send(std::move(reply));
      }
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) return;
                      self->outbox_.pop_front();
                      if (!self->outbox_.empty()) self->write();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::shared_ptr<LiveSession> live_;
  Server::Impl& server_;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Server::Impl& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       self->on_read(ec);
                     });
  }

  void on_read(beast::error_code ec) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      const auto parts = split_path(std::string_view(req_.target().data(), req_.target().size()));
      // api v1 sessions {id} stream
      if (parts.size() == 5 && parts[0] == "api" && parts[1] == "v1" && parts[2] == "sessions" &&
          parts[4] == "stream") {
        if (auto live = server_.find(parts[3])) {
          stream_.expires_never();
          std::make_shared<WsConnection>(stream_.release_socket(), std::move(live), server_)
              ->accept(std::move(req_));
          return;
        }
      }
      respond(json_error(http::status::not_found, "unknown stream"));
      return;
    }
    respond(server_.handle(req_.method(),
                           std::string_view(req_.target().data(), req_.target().size()),
                           req_.body()));
  }

  void respond(Reply reply) {
    auto res = std::make_shared<http::response<http::string_body>>(reply.status, req_.version());
    res->set(http::field::server, "bam");
    res->set(http::field::content_type, reply.content_type);
    res->keep_alive(req_.keep_alive());
    res->body() = std::move(reply.body);
    res->prepare_payload();
    http::async_write(stream_, *res,
                      [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                        if (ec) return;
                        if (!res->keep_alive()) {
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  Server::Impl& server_;
};

}  // namespace

void Server::Impl::accept() {
  acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (!acceptor->is_open()) return;
    if (!ec) std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    accept();
  });
}

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
  Impl& s = *impl_;
  s.default_algorithm = parse_algorithm(s.options.algorithm);
  s.load_catalog();
  s.load_sessions();
  const tcp::endpoint endpoint(net::ip::make_address(s.options.address), s.options.port);
  s.acceptor.emplace(net::make_strand(s.ioc));
  s.acceptor->open(endpoint.protocol());
  s.acceptor->set_option(net::socket_base::reuse_address(true));
  s.acceptor->bind(endpoint);
  s.acceptor->listen(net::socket_base::max_listen_connections);
  s.work.emplace(net::make_work_guard(s.ioc));
  s.accept();
  for (int i = 0; i < std::max(1, s.options.threads); ++i) {
    s.threads.emplace_back([&s] { s.ioc.run(); });
  }
  return s.acceptor->local_endpoint().port();
}

void Server::stop() {
  Impl& s = *impl_;
  if (s.threads.empty()) return;
  net::post(s.ioc, [&s] {
    beast::error_code ec;
    if (s.acceptor) s.acceptor->close(ec);
  });
  s.work.reset();
  s.ioc.stop();
  for (auto& t : s.threads) t.join();
  s.threads.clear();
}

void Server::wait() {
  for (auto& t : impl_->threads) t.join();
  impl_->threads.clear();
}

int serve(const ServerOptions& options) {
  Server server(options);
  const unsigned short port = server.start();
  std::cout << "listening on http://" << options.address << ':' << port << std::endl;
  net::io_context signals_ctx;
  net::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { server.stop(); });
  signals_ctx.run();
  return 0;
}

}  // namespace bam::teaching
