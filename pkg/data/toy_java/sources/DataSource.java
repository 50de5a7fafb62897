package toy.sources;

/**
 * Something bytes can be read from.
 */
public abstract class DataSource {

    /**
     * Opens the source for reading.
     *
     * @throws IllegalStateException when already open
     */
    public abstract void open();

    /** Closes the source. */
    public abstract void close();

    /**
     * Returns a human readable label for the source.
     */
    public String label() {
        return "source";
    }
}
