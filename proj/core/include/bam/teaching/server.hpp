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

#ifndef BAM_TEACHING_SERVER_HPP_
#define BAM_TEACHING_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <string>

namespace bam::teaching {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path environment_dir = "environments";
  // Empty: sessions live in memory only.
  std::filesystem::path data_dir;
  std::string algorithm = "bam";
  int threads = 2;
  // Agent step interval during agent-control; 0 leaves ticks to the client.
  int tick_ms = 250;
};

// HTTP and WebSocket front end for teaching sessions.
//
//   GET  /api/v1/environments               environment list (JSON)
//   GET  /api/v1/environments/{name}        environment file (text)
//   POST /api/v1/sessions                   create a session
//   GET  /api/v1/sessions/{id}              current snapshot
//   POST /api/v1/sessions/{id}/events       apply one event message
//   GET  /api/v1/sessions/{id}/log          event log (JSON lines)
//   GET  /api/v1/sessions/{id}/dataset      dataset file (text)
//   GET  /api/v1/sessions/{id}/checkpoint   latest learner checkpoint (text)
//   WS   /api/v1/sessions/{id}/stream       events in, snapshots out
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Loads environments and stored sessions, binds, and starts the worker
  // threads. Returns the bound port.
  unsigned short start();
  void stop();
  // Blocks until stop() is called.
  void wait();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Runs a server until SIGINT or SIGTERM. Returns a process exit code.
int serve(const ServerOptions& options);

}  // namespace bam::teaching

#endif  // BAM_TEACHING_SERVER_HPP_
