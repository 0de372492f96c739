#include "limits_a.h"

static int queue[QUEUE_LIMIT];

int queue_push(int v)
{
	static int fill;

	if (fill >= QUEUE_LIMIT)
		return -1;
	queue[fill] = v;
	fill = fill + 1;
	return 0;
}
