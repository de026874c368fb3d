// Built with warnings enabled; CMake adds one generated translation unit per
// public header next to this one, so a header with a missing include fails
// the build instead of compiling by accident.
#include "ngcs.hpp"
#include "ngcs/harness/config.hpp"
#include "ngcs/harness/experiment.hpp"
#include "ngcs/harness/io.hpp"
#include "ngcs/harness/plot.hpp"
