#include <stdio.h>

int main(void)
{
	puts("this is not a verdict");
	puts("neither is this");
	fflush(stdout);
	return 3;
}
