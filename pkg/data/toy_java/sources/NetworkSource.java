package toy.sources;

/** Reads bytes from a remote peer. */
public class NetworkSource extends DataSource {

    private final String host;
    private final int port;
    private boolean connected;

    public NetworkSource(String host, int port) {
        this.host = host;
        this.port = port;
    }

    /**
     * Opens the network source for reading once connected.
     */
    @Override
    public void open() {
        connected = true;
    }

    @Override
    public void close() {
        connected = false;
    }

    /** Returns a human readable label for the network source and host. */
    @Override
    public String label() {
        return host + ":" + port;
    }
}
