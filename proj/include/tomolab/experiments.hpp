#ifndef TOMOLAB_EXPERIMENTS_HPP
#define TOMOLAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

namespace tomolab {

// Batch front door: a named experiment consumes a JSON config and writes its
// outputs plus manifest.json into output_dir. Exit contract: 0 all assertions
// pass, 1 an assertion failed, 2 usage/config error.
std::vector<std::string> list_experiments();

int run_config_file(const std::string& config_path);

// Summary CSV plus PGM renders for every raw field found under manifest_dir.
int write_report(const std::string& manifest_dir);

}  // namespace tomolab

#endif
