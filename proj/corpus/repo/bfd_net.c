#include <string.h>
#include <sys/socket.h>

#include "bfd_net.h"

/* Reads one datagram off the socket and fills in address metadata. Both
 * receive paths hand the raw payload back to the caller untouched. */
ssize_t bfd_recv_ipv4(int sd, uint8_t *msgbuf, size_t msgbuflen, uint8_t *ttl,
		      char *port, char *vrfname, size_t vrfnamelen,
		      struct sockaddr_any *local, struct sockaddr_any *peer)
{
	struct msghdr msghdr;
	struct iovec iov[1];
	ssize_t mlen;

	memset(&msghdr, 0, sizeof(msghdr));
	memset(local, 0, sizeof(*local));
	memset(peer, 0, sizeof(*peer));
	port[0] = '\0';
	vrfname[0] = '\0';
	(void)vrfnamelen;
	*ttl = 0;

	iov[0].iov_base = msgbuf;
	iov[0].iov_len = msgbuflen;
	msghdr.msg_iov = iov;
	msghdr.msg_iovlen = 1;

	mlen = recvmsg(sd, &msghdr, 0);
	return mlen;
}

ssize_t bfd_recv_ipv6(int sd, uint8_t *msgbuf, size_t msgbuflen, uint8_t *ttl,
		      char *port, char *vrfname, size_t vrfnamelen,
		      struct sockaddr_any *local, struct sockaddr_any *peer)
{
	struct msghdr msghdr;
	struct iovec iov[1];
	ssize_t mlen;

	memset(&msghdr, 0, sizeof(msghdr));
	memset(local, 0, sizeof(*local));
	memset(peer, 0, sizeof(*peer));
	port[0] = '\0';
	vrfname[0] = '\0';
	(void)vrfnamelen;
	*ttl = 0;

	iov[0].iov_base = msgbuf;
	iov[0].iov_len = msgbuflen;
	msghdr.msg_iov = iov;
	msghdr.msg_iovlen = 1;

	mlen = recvmsg(sd, &msghdr, 0);
	return mlen;
}
