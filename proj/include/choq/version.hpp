#pragma once

#define CHOQ_VERSION "0.1.0"
