int handle_frame(const unsigned char *buf, unsigned long len)
{
	if (len < 8)
		return 0;
	return buf[1] == 2;
}
