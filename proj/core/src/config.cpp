#include "nvreg/algebra.hpp"
