#pragma once

#define PAIRCLASS_VERSION "0.1.0"
