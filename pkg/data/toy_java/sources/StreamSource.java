package toy.sources;

import java.io.InputStream;

/** Reads bytes from a wrapped input stream. */
public class StreamSource extends DataSource {

    private final InputStream in;
    private boolean open;

    public StreamSource(InputStream in) {
        this.in = in;
    }

    /**
     * Opens the source for reading and resets the state.
     */
    @Override
    public void open() {
        if (open) {
            throw new IllegalStateException("already open");
        }
        open = true;
    }

    @Override
    public void close() {
        open = false;
    }

    /** Returns the label of the source. */
    @Override
    public String label() {
        return "stream";
    }
}
