#include "nipot/cli.hpp"

int main(int argc, char** argv) { return nipot::run(argc, argv); }
