#pragma once

#include <string>

struct ServeArgs {
  std::string spec;
  std::string responses = "responses.csv";
  std::string bind;  ///< empty: $DEBTAV_BIND, then 127.0.0.1:8080
};

int run_server(const ServeArgs& args);
