// SPDX-License-Identifier: Apache-2.0
#include "boxforge/cli.hpp"
#include "boxforge/oracle_study.hpp"
int main() { return 0; }
