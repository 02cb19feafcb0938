public class BooksTests : IClassFixture<ApiFactory>
{
    private readonly HttpClient _client;

    public BooksTests(ApiFactory factory)
    {
        _client = factory.CreateClient();
    }

    [Fact]
    public async Task TC1_Create_Book_Valid_Data_Returns_Created()
    {
        // Arrange
        var token = await AuthenticateAsync();
        var authorEmail = GenerateUniqueEmail();
        var request = new { title = "Clean Architecture", isbn = "9780134494166", authorEmail };

        // Act
        var response = await PostAsync("/api/books", request, token);

        // Assert
        var body = await response.Content.ReadFromJsonAsync<JsonObject>();
        Assert.Equal(HttpStatusCode.Created, response.StatusCode);
        Assert.True(body["id"].GetValueKind() == JsonValueKind.Number);
        Assert.Equal("Clean Architecture", body["title"].ToString());
        Assert.Equal("9780134494166", body["isbn"].ToString());
    }

    [Fact]
    public async Task TC2_Create_Book_Title_Above_Max_Length_Returns_Bad_Request()
    {
        // Arrange
        var token = await AuthenticateAsync();
        var request = new { title = new string('a', 121), isbn = "9780134494166" };

        // Act
        var response = await PostAsync("/api/books", request, token);

        // Assert
        Assert.Equal(HttpStatusCode.BadRequest, response.StatusCode);
    }

    [Fact]
    public async Task TC3_Create_Book_Invalid_Isbn_Returns_Bad_Request()
    {
        // Arrange
        var token = await AuthenticateAsync();
        var request = new { title = "Refactoring", isbn = "97801-3475" };

        // Act
        var response = await PostAsync("/api/books", request, token);

        // Assert
        Assert.Equal(HttpStatusCode.BadRequest, response.StatusCode);
    }

    [Fact]
    public async Task TC4_Create_Book_Without_Token_Returns_Unauthorized()
    {
        // Arrange
        var request = new { title = "Refactoring", isbn = "9780134757599" };

        // Act
        var response = await _client.PostAsJsonAsync("/api/books", request);

        // Assert
        Assert.Equal(HttpStatusCode.Unauthorized, response.StatusCode);
    }

    [Fact]
    public async Task TC5_Get_Book_Existing_Id_Returns_Book()
    {
        // Arrange
        var token = await AuthenticateAsync();
        var created = await CreateBookAsync(new { title = "Design Patterns", isbn = "9780201633610" }, token);
        var id = created["id"].GetValue<int>();

        // Act
        var response = await _client.GetAsync($"/api/books/{id}");

        // Assert
        var body = await response.Content.ReadFromJsonAsync<JsonObject>();
        Assert.Equal(HttpStatusCode.OK, response.StatusCode);
        Assert.Equal(id, body["id"].GetValue<int>());
        Assert.False(string.IsNullOrEmpty(body["title"].ToString()));
    }

    [Fact]
    public async Task TC6_Get_Book_Unknown_Id_Returns_Not_Found()
    {
        // Arrange
        var id = 999999;

        // Act
        var response = await _client.GetAsync($"/api/books/{id}");

        // Assert
        Assert.Equal(HttpStatusCode.NotFound, response.StatusCode);
    }
}
