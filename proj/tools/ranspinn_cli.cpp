#include <string>
#include <vector>

#include "ranspinn/workbench/cli.hpp"

int main(int argc, char** argv) {
    return ranspinn::workbench::run_cli(std::vector<std::string>(argv, argv + argc));
}
