#include "cli/app.hpp"

int main(int argc, char** argv) { return mnrv::cli::run(argc, argv); }
