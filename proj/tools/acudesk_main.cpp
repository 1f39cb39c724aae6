#include "cli.hpp"

int main(int argc, char** argv) { return acudesk::cli::run(argc, argv); }
