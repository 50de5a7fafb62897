package toy.sources;

/** Reads bytes from an in-memory buffer. */
public class MemorySource extends DataSource {

    private byte[] buffer;
    private boolean ready;

    public MemorySource(byte[] buffer) {
        this.buffer = buffer;
    }

    /**
     * Opens the memory source for reading and marks the buffer ready.
     */
    @Override
    public void open() {
        ready = buffer != null;
    }

    /**
     * Closes the memory source and drops the buffer.
     */
    @Override
    public void close() {
        ready = false;
        buffer = null;
    }

    /** Returns a human readable label for the memory source. */
    @Override
    public String label() {
        return "memory[" + (buffer == null ? 0 : buffer.length) + "]";
    }
}
