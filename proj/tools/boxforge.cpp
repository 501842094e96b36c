// SPDX-License-Identifier: Apache-2.0
#include "boxforge/cli.hpp"

int main(int argc, char** argv) { return boxforge::cli::run(argc, argv); }
