#pragma once

// HTTP routing over debtav::Service, shared by `debtav serve` and the tests.

#include <httplib.h>

#include "debtav/service.hpp"

namespace debtav::http {

inline void send(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, "application/json");
}

inline void mount_routes(httplib::Server& server, Service& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Get("/module", [&](const httplib::Request&, httplib::Response& res) {
    send(res, service.get_module());
  });
  server.Get("/staircase", [&](const httplib::Request&, httplib::Response& res) {
    send(res, service.get_staircase());
  });
  server.Post("/predict", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_predict(req.body));
  });
  server.Post("/responses", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_responses(req.body));
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

}  // namespace debtav::http
