#pragma once

#include <functional>
#include <string>
#include <vector>

#include "runtime.hpp"

namespace lqft::cli {

struct Command {
  std::string name;
  std::string help;
  // Parses the config block, runs, writes artifacts; returns the summary fields.
  std::function<json(Params&, Run&)> run;
  // Parses the config block without running; returns violated preconditions.
  std::function<std::vector<std::string>(Params&)> check;
};

const std::vector<Command>& commands();
const Command* find_command(const std::string& name);

}  // namespace lqft::cli
