#include "serve.hpp"

#include <cstdlib>
#include <iostream>

#include "debtav/errors.hpp"
#include "routes.hpp"

namespace {

std::pair<std::string, int> split_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw debtav::ValidationError("bind address must be host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  if (port < 0 || port > 65535) throw debtav::ValidationError("port out of range");
  return {host, port};
}

}  // namespace

int run_server(const ServeArgs& args) {
  std::string bind = args.bind;
  if (bind.empty()) {
    const char* env = std::getenv("DEBTAV_BIND");
    bind = env ? env : "127.0.0.1:8080";
  }
  const auto [host, port] = split_bind(bind);

  debtav::ResponseStore store(args.responses);
  debtav::Service service(debtav::SurveyModuleSpec::load(args.spec), &store);

  httplib::Server server;
  debtav::http::mount_routes(server, service);

  std::cerr << "debtav serve: listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "debtav serve: cannot bind " << host << ":" << port << "\n";
    return 2;
  }
  return 0;
}
