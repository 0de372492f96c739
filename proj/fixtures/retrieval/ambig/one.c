int handle_frame(const unsigned char *buf, unsigned long len)
{
	if (len < 4)
		return 0;
	return buf[0] == 1;
}
