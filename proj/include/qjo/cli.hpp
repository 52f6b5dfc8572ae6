#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qjo {

/// Entry point of the `qjo` tool. `args` excludes the program name. Returns the process exit status.
///   solve    --workload F --query ID [--budget-ms T] [--seed S] [--mode auto|relax|decompose|direct]
///            [--capacity N] [--csv PATH] [--emit-hint]
///   oracle   --workload F --query ID
///   bench    --workload F [--budget-ms T] [--seeds K] [--csv PATH]
///   generate --out F [--count N] [--seed S]
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}
