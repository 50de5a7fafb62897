package toy.sources;

/** Reads bytes from a file on local disk. */
public class FileSource extends DataSource {

    private final String path;
    private int descriptor = -1;
    private long cursor;

    public FileSource(String path) {
        this.path = path;
    }

    /**
     * Opens the file source for reading and resets the cursor.
     */
    @Override
    public void open() {
        descriptor = path.hashCode();
        cursor = 0L;
    }

    /** Closes the file source and clears the descriptor. */
    @Override
    public void close() {
        descriptor = -1;
    }

    /**
     * Returns a human readable label with the path for the file source.
     */
    @Override
    public String label() {
        return "file:" + path;
    }
}
