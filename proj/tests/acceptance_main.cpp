#include <iostream>

#include "memlab/acceptance.hpp"

int main() { return memlab::run_acceptance(std::cout) == 0 ? 0 : 1; }
