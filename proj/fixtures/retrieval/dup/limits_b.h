#ifndef LIMITS_B_H
#define LIMITS_B_H

#define QUEUE_LIMIT 32

#endif
