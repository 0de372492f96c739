#ifndef LIMITS_A_H
#define LIMITS_A_H

#define QUEUE_LIMIT 16

#endif
