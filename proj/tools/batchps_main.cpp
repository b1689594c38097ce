#include "app.hpp"

int main(int argc, char** argv) { return batchps::cli::run(argc, argv); }
